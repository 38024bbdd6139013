#pragma once

#include <string>
#include <vector>

#include "sosgeom/fit.hpp"
#include "sosgeom/proximity.hpp"

namespace sosgeom {

struct ContainmentProblem {
  std::vector<BodySpec> targets;  // sets to contain, world coordinates
  int degree = 4;                 // 2d of the container polynomial
  // 2d-hat of the sos multipliers; -1 picks 2d - min_i deg(g_i), rounded up
  // to even
  int multiplier_degree = -1;
  SolverConfig solver;
};

struct TargetCertificate {
  std::vector<Polynomial> multipliers;  // tau_i, one per target constraint
  std::vector<GramCertificate> multiplier_grams;
  GramCertificate residual_gram;  // sos witness of 1 - p - sum tau_i (1 - g_i)
};

struct ContainmentCertificate {
  FittedBody container;  // { p <= 1 } in world coordinates
  std::vector<BodySpec> targets;
  std::vector<TargetCertificate> per_target;
  int multiplier_degree = 0;
};

// Minimum-volume sos-convex container of a union of basic semialgebraic
// sets. Throws SolverError with status Infeasible when no certificate exists
// at the requested degrees (raising multiplier_degree by 2 enlarges the
// search space).
ContainmentCertificate contain(const ContainmentProblem& problem,
                               FitObjective objective = FitObjective::Logdet);

struct CheckReport {
  struct Entry {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // signed slack; positive means pass with room
    std::string note;
  };
  std::vector<Entry> entries;
  bool all_pass() const;
};

// Re-checks a certificate from scratch: (a) coefficient-wise residual
// identities, (b) PSD-ness of every Gram matrix, (c) sampled containment of
// each target. Failures are report entries, never exceptions.
CheckReport verify_certificate(const ContainmentCertificate& cert, unsigned long long seed = 7,
                               int samples_per_target = 10000, double eps_coef = 1e-6,
                               double eps_psd = 1e-8);

}  // namespace sosgeom
