#include "dualquant/lp.hpp"

namespace dualquant {

std::optional<BarycentricCertificate> solve_barycentric_min(const Point& site, const Grid& grid,
                                                            const Eigen::VectorXd& costs) {
  return BarycentricSolver<double>(grid.points()).solve(site, costs);
}

bool hull_contains(const Point& site, const Grid& grid) {
  return BarycentricSolver<double>(grid.points()).contains(site);
}

}  // namespace dualquant
