#pragma once

namespace swarmgoal {

/// Inverse error function on (-1, 1). Returns +/-inf at +/-1 and NaN outside.
///
/// A rational seed (Giles, "Approximating the erfinv function", 2010) is
/// polished with two Halley iterations against std::erf, which brings the
/// result to ~1e-15 relative accuracy across the domain, including the tails
/// where the critical-noise formula spends most of its time.
double erf_inv(double x);

}  // namespace swarmgoal
