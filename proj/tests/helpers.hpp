#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "capless/frontend.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(CAPLESS_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Declarations plus a trivial body, for parsing fragments against them.
inline capless::Program decls(const std::string& text, capless::Dialect d, capless::NameSupply& ns) {
    return capless::parse_program(text + "\nlet zz = fun (q: Top) => q in zz", d, ns);
}

inline const capless::Name& name_of(const capless::Program& p, const std::string& hint) {
    for (const auto& b : p.ctx.items())
        if (b.name.hint == hint) return b.name;
    throw std::runtime_error("no binding " + hint);
}

}  // namespace testing
