#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apgen {

// Reproducibility record emitted once per CLI run: the command, its config
// snapshot, seed, input/output paths and a content hash per output artifact.
struct RunManifest {
    std::string command;
    std::string config_json = "{}";
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    void write(const std::string& path) const;
};

// FNV-1a 64-bit content hash used for manifest artifact entries.
std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t n);

}  // namespace apgen
