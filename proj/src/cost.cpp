#include "dn/cost.hpp"

#include <cstdio>

#include "dn/check.hpp"

namespace dn {

const char* CostReport::csv_header() {
    return "comp_dense,comp_sparse,mem_dense,mem_sparse,speedup_comp,speedup_mem";
}

std::string CostReport::csv_row() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  comp_dense, comp_sparse, mem_dense, mem_sparse,
                  speedup_comp, speedup_mem);
    return buf;
}

CostReport theoretical_costs(std::size_t n, double o_c, double o_m) {
    check(n >= 1, "theoretical_costs: n must be >= 1");
    check(o_c >= 0.0 && o_c <= 1.0, "theoretical_costs: o_c outside [0,1]");
    check(o_m >= 0.0 && o_m <= 1.0, "theoretical_costs: o_m outside [0,1]");
    const double nn = static_cast<double>(n);
    CostReport r;
    r.comp_dense = nn * nn;
    r.comp_sparse = o_m * o_c * nn * nn + 2.0 * nn;
    r.mem_dense = nn * nn + nn;
    r.mem_sparse = o_m * o_c * nn * nn + 4.0 * nn;
    r.speedup_comp = r.comp_dense / r.comp_sparse;
    r.speedup_mem = r.mem_dense / r.mem_sparse;
    return r;
}

SpeedupPair measured_speedup(const CostCounters& delta, const CostCounters& dense) {
    check(dense.macs > 0 && dense.weight_fetches > 0,
          "measured_speedup: dense counters must be nonzero");
    check(delta.macs > 0 && delta.weight_fetches > 0,
          "measured_speedup: zero delta counters");
    return {static_cast<double>(dense.macs) / static_cast<double>(delta.macs),
            static_cast<double>(dense.weight_fetches) /
                static_cast<double>(delta.weight_fetches)};
}

} // namespace dn
