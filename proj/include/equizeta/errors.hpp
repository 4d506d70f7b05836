#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace equizeta {

/// Failure categories shared by every module. The CLI maps them onto exit codes.
enum class Errc {
  domain,          // argument outside the operation's domain
  non_convergent,  // truncation could not certify the requested tolerance
  singular_point,  // evaluation point on an excluded lattice / branch cut
  not_applicable,  // no continuation or no torsion for this model
  singular,        // linear system that should be invertible is not
  invalid_config,  // malformed CLI / parameter input
};

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::domain: return "DomainError";
    case Errc::non_convergent: return "NonConvergent";
    case Errc::singular_point: return "SingularPoint";
    case Errc::not_applicable: return "NotApplicable";
    case Errc::singular: return "SingularError";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace equizeta
