#pragma once

#include <cstdint>

namespace nmrx {

// Version stamped into every JSON document and the candidate database.
// Readers reject anything newer than what they understand.
inline constexpr int schema_version = 1;

inline constexpr char db_magic[8] = {'N', 'M', 'R', 'X', 'D', 'B', '0', '1'};
inline constexpr std::uint32_t db_format_version = 1;

}  // namespace nmrx
