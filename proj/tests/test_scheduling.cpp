#include <doctest.h>

#include "hetnet/error.hpp"
#include "hetnet/scheduling.hpp"
#include "support.hpp"

using namespace hetnet;
using hetnet::testing::make_rates;

namespace {

DemandProfile profile(std::vector<double> d, std::vector<double> s) {
  DemandProfile p{std::move(d), RealMatrix(1, s.size())};
  for (std::size_t k = 0; k < s.size(); ++k) p.s(0, k) = s[k];
  return p;
}

}  // namespace

TEST_CASE("everything fits: nothing blocked") {
  const RateMatrix r = make_rates(1, 3, {100.0, 200.0, 300.0});
  const DemandProfile p = resource_demand(r, std::vector<double>{100.0, 100.0, 100.0});
  const Association a = Association::integral(std::vector<std::size_t>{0, 0, 0}, 1, LoadModel::resource, &p);
  for (SchedulePolicy pol : {SchedulePolicy::mprf, SchedulePolicy::marf}) {
    const ScheduleOutcome o = schedule(a, p, Budget{}, pol, r);
    CHECK(o.blocked[0].empty());
    CHECK(o.served_count() == 3);
  }
}

TEST_CASE("three users of two subbands each under a budget of three") {
  const RateMatrix r = make_rates(1, 3, {500.0, 500.0, 500.0});
  const DemandProfile p = resource_demand(r, std::vector<double>{1000.0, 1000.0, 1000.0});
  const Association a = Association::integral(std::vector<std::size_t>{0, 0, 0}, 1, LoadModel::resource, &p);
  const ScheduleOutcome o = schedule(a, p, Budget{3}, SchedulePolicy::mprf, r);
  CHECK(o.served[0] == std::vector<std::size_t>{0});
  CHECK(o.blocked[0] == std::vector<std::size_t>{1, 2});
  CHECK(o.consumed[0] == 2.0);
}

TEST_CASE("policies diverge when rate and demand orders disagree") {
  // user 0: d=2000, R=1000, s=2; user 1: d=500, R=500, s=1; budget 2
  const RateMatrix same = make_rates(1, 2, {1000.0, 500.0});
  const DemandProfile p1 = resource_demand(same, std::vector<double>{2000.0, 500.0});
  const Association a1 = Association::integral(std::vector<std::size_t>{0, 0}, 1, LoadModel::resource, &p1);
  CHECK(schedule(a1, p1, Budget{2}, SchedulePolicy::mprf, same).served[0] == std::vector<std::size_t>{0});
  CHECK(schedule(a1, p1, Budget{2}, SchedulePolicy::marf, same).served[0] == std::vector<std::size_t>{0});

  // user 0: d=500, R=1000, s=0.5; user 1: d=1500, R=500, s=3; budget 3
  const RateMatrix inv = make_rates(1, 2, {1000.0, 500.0});
  const DemandProfile p2 = resource_demand(inv, std::vector<double>{500.0, 1500.0});
  const Association a2 = Association::integral(std::vector<std::size_t>{0, 0}, 1, LoadModel::resource, &p2);
  const ScheduleOutcome mprf = schedule(a2, p2, Budget{3}, SchedulePolicy::mprf, inv);
  const ScheduleOutcome marf = schedule(a2, p2, Budget{3}, SchedulePolicy::marf, inv);
  CHECK(mprf.served[0] == std::vector<std::size_t>{1});
  CHECK(mprf.blocked[0] == std::vector<std::size_t>{0});
  CHECK(marf.served[0] == std::vector<std::size_t>{0});
  CHECK(marf.blocked[0] == std::vector<std::size_t>{1});
}

TEST_CASE("ties keep user id order") {
  const RateMatrix r = make_rates(1, 3, {100.0, 100.0, 100.0});
  const DemandProfile p = profile({800.0, 800.0, 800.0}, {4.0, 4.0, 4.0});
  const Association a = Association::integral(std::vector<std::size_t>{0, 0, 0}, 1, LoadModel::resource, &p);
  for (SchedulePolicy pol : {SchedulePolicy::mprf, SchedulePolicy::marf}) {
    const ScheduleOutcome o = schedule(a, p, Budget{9}, pol, r);
    CHECK(o.served[0] == std::vector<std::size_t>{0, 1});
    CHECK(o.blocked[0] == std::vector<std::size_t>{2});
  }
}

TEST_CASE("admission stops at the first user that does not fit") {
  const RateMatrix r = make_rates(1, 3, {100.0, 100.0, 100.0});
  const DemandProfile p = profile({1500.0, 1000.0, 500.0}, {6.0, 5.0, 1.0});
  const Association a = Association::integral(std::vector<std::size_t>{0, 0, 0}, 1, LoadModel::resource, &p);
  const ScheduleOutcome o = schedule(a, p, Budget{10}, SchedulePolicy::mprf, r);
  CHECK(o.served[0] == std::vector<std::size_t>{0});
  CHECK(o.blocked[0] == std::vector<std::size_t>{1, 2});
}

TEST_CASE("relaxed associations cannot be scheduled") {
  RealMatrix x(2, 1);
  x(0, 0) = x(1, 0) = 0.5;
  const RateMatrix r = make_rates(2, 1, {1.0, 1.0});
  const DemandProfile p = resource_demand(r, std::vector<double>{1.0});
  CHECK_THROWS_AS(schedule(Association::relaxed(x, LoadModel::user_count), p, Budget{}, SchedulePolicy::mprf, r),
                  DomainError);
}

TEST_CASE("schedule properties on random instances") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t num_bs = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    const std::size_t num_users = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const RateMatrix r = testing::random_rates(rng, num_bs, num_users, 20.0, 3000.0);
    const DemandProfile p = resource_demand(r, testing::random_demands(rng, num_users));
    const Association a = Association::integral(testing::random_serving(rng, num_bs, num_users), num_bs,
                                                LoadModel::resource, &p);
    const Budget budget{1 + static_cast<int>(rng.uniform() * 100)};
    const SchedulePolicy pol = trial % 2 ? SchedulePolicy::mprf : SchedulePolicy::marf;
    const ScheduleOutcome o = schedule(a, p, budget, pol, r);
    const auto serving = a.serving();
    for (std::size_t n = 0; n < num_bs; ++n) {
      // partition of the BS's users
      std::vector<std::size_t> all = o.served[n];
      all.insert(all.end(), o.blocked[n].begin(), o.blocked[n].end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expected;
      for (std::size_t k = 0; k < num_users; ++k)
        if (serving[k] == n) expected.push_back(k);
      CHECK(all == expected);
      // budget safety
      double used = 0.0;
      for (std::size_t k : o.served[n]) used += p.s(n, k);
      CHECK(used == doctest::Approx(o.consumed[n]));
      CHECK(o.consumed[n] <= budget.subbands);
      // the first blocked user does not fit on top of the admitted prefix
      if (!o.blocked[n].empty()) CHECK(o.consumed[n] + p.s(n, o.blocked[n].front()) > budget.subbands);
    }
    // a larger budget never serves fewer users
    const ScheduleOutcome bigger = schedule(a, p, Budget{budget.subbands + 1 + static_cast<int>(rng.uniform() * 50)}, pol, r);
    CHECK(bigger.served_count() >= o.served_count());
  }
}

TEST_CASE("policy names round-trip") {
  CHECK(parse_policy("mprf") == SchedulePolicy::mprf);
  CHECK(parse_policy("marf") == SchedulePolicy::marf);
  CHECK(to_string(SchedulePolicy::marf) == "marf");
  CHECK_THROWS_AS(parse_policy("fifo"), ConfigError);
}
