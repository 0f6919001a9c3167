#pragma once

#define TREELENS_VERSION_MAJOR 0
#define TREELENS_VERSION_MINOR 1
#define TREELENS_VERSION_PATCH 0
#define TREELENS_VERSION "0.1.0"

namespace treelens {

inline constexpr const char* version() { return TREELENS_VERSION; }

}  // namespace treelens
