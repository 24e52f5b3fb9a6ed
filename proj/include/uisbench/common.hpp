#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uisbench {

/// The two answers a participant or a system can give for a case.
enum class Verdict { kWorking, kMalfunction };

char to_char(Verdict v);
/// Accepts "M"/"W" (case-insensitive). Throws Error on anything else.
Verdict verdict_from_string(std::string_view s);

/// Error raised by every module. `code` is a stable machine-readable tag
/// (it becomes the `code` member of API error bodies); `field` names the
/// offending input when there is one.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(std::move(code)), field_(std::move(field)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string code_;
  std::string field_;
};

/// All stochastic operations take one of these explicitly.
using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag and an index into an independent
/// seed (splitmix64 finalizer). Used to give every subject, trial set and
/// session its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace uisbench
