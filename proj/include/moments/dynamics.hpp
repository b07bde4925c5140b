#pragma once

// Numerical evolution: fixed-step RK4 on a derived moment system, conserved
// quantity monitoring, and a particle ensemble following Hamilton's equations.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "moments/eomgen.hpp"

namespace moments {

struct MomentState {
  Kind kind = Kind::Quantum;
  double t = 0;
  double q = 0;
  double p = 0;
  double hbar = 0;
  std::map<MomentKey, double> moments;

  /// Value of M[a,b]; order 0 is 1, order 1 and absent keys are 0.
  double moment(int a, int b) const;
  /// The same numbers with every key relabeled to `kind`.
  MomentState as(Kind kind) const;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, MomentState last) : std::runtime_error(what), lastValid(std::move(last)) {}
  MomentState lastValid;
};

struct ParticleDivergenceError : std::runtime_error {
  ParticleDivergenceError(const std::string& what, std::size_t i) : std::runtime_error(what), index(i) {}
  std::size_t index;
};

/// Right-hand side of an EomSystem flattened to double arithmetic. The state
/// vector is ordered as EomSystem::variables().
class CompiledSystem {
 public:
  CompiledSystem(const EomSystem& sys, double hbar);

  const std::vector<Variable>& variables() const { return vars_; }
  Eigen::VectorXd pack(const MomentState& s) const;
  MomentState unpack(const Eigen::VectorXd& x, double t) const;
  void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

 private:
  struct Term {
    double coeff;
    int q;
    int p;
    std::vector<int> factors;
  };
  Kind kind_;
  double hbar_;
  std::vector<Variable> vars_;
  std::vector<std::vector<Term>> rhs_;
  int qIndex_ = -1;
  int pIndex_ = -1;
};

/// Samples every `stride` steps plus the final state. Steps have size dt
/// except a shortened last one; a negative dt integrates backwards.
std::vector<MomentState> integrate(const EomSystem& sys, const MomentState& init, double tEnd, double dt,
                                   int stride = 1);

struct MonitorSample {
  double t;
  double effective;  // H_Q or H_C at the system's order
  double centroid;   // H(q,p)
  double difference;
  double heisenberg;  // M20*M02 - M11^2
};

struct MonitorReport {
  std::vector<MonitorSample> samples;
  double driftEffective = 0;
  double driftCentroid = 0;
  double driftDifference = 0;
  double driftHeisenberg = 0;
  /// Even-even moments that turned negative (first occurrence per moment).
  std::vector<std::string> warnings;
};

MonitorReport monitorConserved(const HamiltonianSpec& h, const EomSystem& sys,
                               const std::vector<MomentState>& trajectory);

/// Structured text block, every line prefixed with `prefix`.
void writeReport(std::ostream& out, const MonitorReport& report, std::string_view prefix = "# ");

struct ParticleEnsemble {
  Eigen::Matrix<double, Eigen::Dynamic, 2> particles;  // columns: q, p

  std::size_t size() const { return static_cast<std::size_t>(particles.rows()); }
};

/// Normal cloud with the given centroid and second moments (M20 = var p,
/// M11 = cov, M02 = var q), seeded deterministically.
ParticleEnsemble gaussianEnsemble(double q, double p, double m20, double m11, double m02, std::size_t n,
                                  std::uint64_t seed);

/// Exact moments of a normal distribution up to `order`.
MomentState gaussianMoments(double q, double p, double m20, double m11, double m02, int order, Kind kind,
                            double hbar = 0);

/// Each particle advanced by RK4 under Hamilton's equations. The optional
/// observer sees the ensemble at every `stride`-th step and at the end.
ParticleEnsemble ensembleEvolve(const HamiltonianSpec& h, const ParticleEnsemble& ens, double tEnd, double dt,
                                int stride = 1,
                                const std::function<void(double, const ParticleEnsemble&)>& observer = {});

/// Centroid and central moments 2 <= a+b <= maxOrder, classical keys.
MomentState sampleMoments(const ParticleEnsemble& ens, int maxOrder, double t = 0);
/// Standard error of each sampled central moment.
std::map<MomentKey, double> sampleStandardErrors(const ParticleEnsemble& ens, int maxOrder);

/// CSV with header `t,q,p,<prefix>[a,b],...`; values at 17 significant digits.
void writeCsv(std::ostream& out, const std::vector<MomentState>& trajectory, const std::vector<MomentKey>& keys,
              std::string_view prefix);

/// Parses `q=..., p=..., G[2,0]=...` style assignments (comma or newline separated).
MomentState parseState(std::string_view text, Kind kind);

}  // namespace moments
