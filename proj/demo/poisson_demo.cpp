// Poisson on the butterfly with Franke's function: a short h-refinement run
// through the library API, printing errors, the fitted order and timings.

#include <cstdio>

#include "ufrbf/ufrbf.hpp"

int main()
{
    using namespace ufrbf;
    const auto geometry = butterfly_domain();
    const auto solution = franke();

    DiscretizationOptions<2> opt;
    opt.degree = 4;
    const auto table = run_convergence(geometry, solution, opt, geometric_spacings(0.08, 4));

    std::printf("%8s %8s %8s %12s %12s %10s\n", "h", "N", "M", "rel_l2", "rel_linf", "seconds");
    for (const auto& r : table.rows)
        std::printf("%8.4f %8ld %8ld %12.3e %12.3e %10.3f\n", r.h, static_cast<long>(r.N), static_cast<long>(r.M),
                    r.errors.rel_l2, r.errors.rel_linf, r.timings.total());
    std::printf("observed order (rel_l2): %.2f\n", table.slopes()[1].slope);
    return 0;
}
