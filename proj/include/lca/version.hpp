#pragma once

#define LCA_VERSION_STRING "0.1.0"

namespace lca {
inline constexpr const char* version = LCA_VERSION_STRING;
}
