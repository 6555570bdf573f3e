#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace apgen {

using TokenId = std::int32_t;

struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token alphabet of a task: base symbols plus one or two designated mask
// tokens and optional special markers (separator, begin/end).
class Vocab {
public:
    Vocab() = default;

    TokenId add(const std::string& name, bool is_mask = false) {
        if (index_.count(name)) throw ContractError("duplicate token name: " + name);
        TokenId id = static_cast<TokenId>(names_.size());
        names_.push_back(name);
        index_[name] = id;
        mask_flag_.push_back(is_mask);
        if (is_mask) masks_.push_back(id);
        return id;
    }

    TokenId id(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ContractError("unknown token name: " + name);
        return it->second;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const std::string& name(TokenId id) const {
        check(id);
        return names_[static_cast<std::size_t>(id)];
    }

    bool is_mask(TokenId id) const {
        check(id);
        return mask_flag_[static_cast<std::size_t>(id)];
    }

    // The default mask used by the insert operation when the denoiser does
    // not request a specific one.
    TokenId primary_mask() const {
        if (masks_.empty()) throw ContractError("vocab has no mask token");
        return masks_.front();
    }

    const std::vector<TokenId>& masks() const { return masks_; }
    std::size_t size() const { return names_.size(); }

    void check(TokenId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
            throw ContractError("token id out of range: " + std::to_string(id));
    }

private:
    std::vector<std::string> names_;
    std::vector<bool> mask_flag_;
    std::vector<TokenId> masks_;
    std::unordered_map<std::string, TokenId> index_;
};

}  // namespace apgen
