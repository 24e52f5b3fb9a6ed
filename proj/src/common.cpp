#include "uisbench/common.hpp"

namespace uisbench {

char to_char(Verdict v) { return v == Verdict::kMalfunction ? 'M' : 'W'; }

Verdict verdict_from_string(std::string_view s) {
  if (s == "M" || s == "m") return Verdict::kMalfunction;
  if (s == "W" || s == "w") return Verdict::kWorking;
  throw Error("validation_error", "verdict must be \"M\" or \"W\"", "verdict");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

}  // namespace uisbench
