#pragma once

#include <functional>
#include <vector>

namespace compolicy {

// Derivative-free minimization by Nelder-Mead simplex search.  The search is
// run from `start` and then from 3 random restart points offset from start at
// radius `scale` (internal fixed-seed stream, so the routine is a
// deterministic function of its arguments).  Each run stops when the simplex
// diameter drops below 1e-6 or after 500*d objective evaluations.  The best
// point seen anywhere -- including `start` itself -- is returned, so the
// result never has a larger objective than the starting point.  A non-finite
// objective value raises NumericalError naming the offending point.
std::vector<double> minimize_nd(const std::function<double(const std::vector<double>&)>& objective,
                                const std::vector<double>& start, double scale);

}  // namespace compolicy
