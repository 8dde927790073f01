#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fo/error.hpp"

namespace fo {

using json = nlohmann::json;

/// Rejects any key of `j` outside `allowed`; `what` names the document.
inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
    require(j.is_object(), ErrorKind::config, std::string(what) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || (k == a);
        require(ok, ErrorKind::config, "unknown key '" + k + "' in " + std::string(what));
    }
}

/// Reads j[key] into out when present; type mismatches become config errors.
template <class T>
void read_optional(const json& j, std::string_view key, T& out, std::string_view what) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string(what) + "." + std::string(key) + ": " + e.what());
    }
}

}  // namespace fo
