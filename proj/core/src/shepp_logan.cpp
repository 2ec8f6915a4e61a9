#include <algorithm>
#include <array>
#include <cmath>

#include "bilearn/errors.hpp"
#include "bilearn/experiments.hpp"

namespace bilearn {

namespace {

struct Ellipse {
  double intensity;
  double a, b;      // semi-axes
  double x0, y0;    // center
  double phi_deg;   // rotation, counter-clockwise
};

// The ten-ellipse head phantom with the rescaled intensities that put the
// image in [0, 1] (skull ring at exactly 1).
constexpr std::array<Ellipse, 10> kEllipses = {{
    {1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

}  // namespace

Eigen::VectorXd generate_shepp_logan(Eigen::Index side) {
  if (side < 16) throw DataError("shepp-logan phantom: side must be >= 16");
  const double pi = std::acos(-1.0);
  Eigen::VectorXd img = Eigen::VectorXd::Zero(side * side);
  for (Eigen::Index c = 0; c < side; ++c) {
    const double x = -1.0 + (2.0 * c + 1.0) / static_cast<double>(side);
    for (Eigen::Index r = 0; r < side; ++r) {
      const double y = 1.0 - (2.0 * r + 1.0) / static_cast<double>(side);
      double v = 0.0;
      for (const Ellipse& e : kEllipses) {
        const double phi = e.phi_deg * pi / 180.0;
        const double dx = x - e.x0;
        const double dy = y - e.y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if (xr * xr / (e.a * e.a) + yr * yr / (e.b * e.b) <= 1.0) v += e.intensity;
      }
      img[c * side + r] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace bilearn
