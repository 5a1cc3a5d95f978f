#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "chiral/sweep/acceptance.hpp"

using namespace chiral::sweep;

namespace {

CriterionResult report(int id, const std::function<CriterionResult()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = f();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s (%.1f s) %s\n", id, r.pass ? "PASS" : "FAIL", r.seconds,
              r.detail.c_str());
  std::fflush(stdout);
  return r;
}

}  // namespace

TEST(Acceptance, Criterion1CommensurateDarkState) {
  EXPECT_TRUE(report(1, criterion_commensurate_dark_state).pass);
}

TEST(Acceptance, Criterion2IncommensurateDarkCurve) {
  EXPECT_TRUE(report(2, criterion_incommensurate_dark_curve).pass);
}

TEST(Acceptance, Criterion3DimerEquivalence) {
  EXPECT_TRUE(report(3, criterion_dimer_equivalence).pass);
}

TEST(Acceptance, Criterion4CavityReduction) {
  EXPECT_TRUE(report(4, criterion_cavity_reduction).pass);
}

TEST(Acceptance, Criterion5MpsMarkovOracle) {
  EXPECT_TRUE(report(5, criterion_mps_markov_oracle).pass);
}

TEST(Acceptance, Criterion6LongDelay) {
  EXPECT_TRUE(report(6, [] { return criterion_long_delay(); }).pass);
}

TEST(Acceptance, Criterion7PhaseShift) {
  EXPECT_TRUE(report(7, [] { return criterion_phase_shift(); }).pass);
}

TEST(Acceptance, Criterion8Decoherence) {
  EXPECT_TRUE(report(8, [] { return criterion_decoherence(); }).pass);
}

TEST(Acceptance, Criterion9Directionality) {
  EXPECT_TRUE(report(9, criterion_directionality).pass);
}
