#ifndef POWERARB_CHECKSUM_HPP
#define POWERARB_CHECKSUM_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace powerarb {

inline std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string Fnv1a64Hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(Fnv1a64(data)));
  return buf;
}

}  // namespace powerarb

#endif  // POWERARB_CHECKSUM_HPP
