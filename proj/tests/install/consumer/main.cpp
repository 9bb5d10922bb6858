#include <cmath>
#include <iostream>

#include <netfx/estimation.hpp>
#include <netfx/pattern.hpp>
#include <netfx/simulator.hpp>

int main() {
  const auto d0 = netfx::make_fixture_d0();
  const auto spec = netfx::saturated_pattern(d0.tree());
  const auto r = netfx::run_pipeline(d0.tree(), spec, netfx::Scope::full, netfx::VarianceMode::estimated());
  std::cout << "phi1 = " << r.fit.phi_hat(0) << "\n";
  return std::abs(r.fit.phi_hat(0) - 30.0) < 1e-9 ? 0 : 1;
}
