#ifndef STHP_VERIFY_HPP
#define STHP_VERIFY_HPP

#include "sthp/study.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sthp {

struct VerifyReport
{
  std::vector<std::string> lines; // one "PASS ..." or "FAIL ..." per check
  bool ok = true;
};

/// Oracle cross-checks on the first level of a study: temporal Hilbert
/// matrices against the Fourier series oracle, symmetry and definiteness of
/// A_ht, and Bartels-Stewart against the reference solver on a random
/// right-hand side drawn from `seed`. Checks whose cost exceeds desk limits
/// are reported as skipped.
VerifyReport verify_discretization(const StudyConfig &config, std::uint64_t seed);

} // namespace sthp

#endif
