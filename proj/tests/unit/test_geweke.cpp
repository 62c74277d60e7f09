#include <doctest.h>

#include "geweke.hpp"

using namespace bgi;

namespace {

void check_all(const std::vector<geweke::StatResult>& results) {
  for (const auto& r : results) {
    INFO(r.name << ": forward " << r.forward << ", sweeps " << r.sweeps << ", se " << r.se);
    CHECK(r.agrees());
  }
}

}  // namespace

TEST_CASE("joint forward and successive-conditional simulation agree on beta moments") {
  check_all(geweke::compare(geweke::make_setup(false), geweke::fixed_mode_stats(), 100000, 12, 40000, true));
}

TEST_CASE("joint simulation check without the collapsed move") {
  std::vector<geweke::NamedStat> stats;
  for (const auto& s : geweke::fixed_mode_stats())
    if (s.first.rfind("beta1", 0) == 0 || s.first.rfind("beta2", 0) == 0) stats.push_back(s);
  check_all(geweke::compare(geweke::make_setup(false), stats, 100000, 12, 20000, false));
}

TEST_CASE("joint simulation check with the hierarchical shrinkage and mean-scale priors") {
  check_all(geweke::compare(geweke::make_setup(true), geweke::hierarchical_stats(), 100000, 12, 40000, true));
}
