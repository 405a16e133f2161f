#include "drillsim/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

namespace drillsim::rng {

const std::array<float, std::size_t{1} << kNormalTableBits>& normal_table() {
  static const auto table = [] {
    std::array<float, std::size_t{1} << kNormalTableBits> t{};
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double p = (static_cast<double>(i) + 0.5) / n;
      t[i] = static_cast<float>(-std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p));
    }
    return t;
  }();
  return table;
}

}  // namespace drillsim::rng
