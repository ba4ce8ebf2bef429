#include "hmpc/sampling.h"

#include <cmath>
#include <random>

namespace hmpc {
namespace {

constexpr double kRelTol = 1e-9;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Vector direction(Eigen::Index n) {
    Vector v(n);
    do {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal_(rng_);
    } while (v.norm() == 0.0);
    return v.normalized();
  }

  // Ball sample biased toward the sphere, where the bounds are tight.
  Vector in_ball(Eigen::Index n, double radius) {
    const double r = uniform_(rng_) < 0.5 ? 1.0 : std::pow(uniform_(rng_), 1.0 / n);
    return direction(n) * (radius * r);
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

class Recorder {
 public:
  explicit Recorder(SamplingReport& r) : r_(r) {}

  void check(const std::string& name, bool ok, const Vector& witness, const std::string& detail) {
    ++r_.evaluated[name];
    if (ok) return;
    if (r_.violations[name]++ == 0) r_.witnesses.push_back({name, witness, detail});
  }

 private:
  SamplingReport& r_;
};

}  // namespace

bool SamplingReport::passed() const {
  for (const auto& [name, count] : violations) {
    if (count > 0) return false;
  }
  return true;
}

SamplingReport run_sampling_checks(const ControllerDesign& d, int samples, std::uint64_t seed) {
  SamplingReport report;
  report.samples = samples;
  report.seed = seed;
  for (const char* name : {"contraction", "margin", "outer_chain", "inner_chain", "ref_chain"}) {
    report.evaluated[name] = 0;
    report.violations[name] = 0;
  }
  Sampler s(seed);
  Recorder rec(report);
  const CascadeModel& m = d.model;
  const AugmentedOuterModel& aug = d.aug;
  const auto& g1 = d.sets.g1;
  const auto& g2 = d.sets.g2;
  const RateBudget& b = d.budget;
  const int n1a = static_cast<int>(aug.a1aug.rows());
  const int n2 = m.n2();
  const int horizon = b.horizon;

  for (int t = 0; t < samples; ++t) {
    {
      const Vector x1aug = g1.boundary_point(s.direction(n1a));
      const Vector xt = g2.boundary_point(s.direction(n2));
      StateBundle st;
      st.x1 = x1aug.head(m.n1());
      st.xf = x1aug.tail(n2);
      st.x2 = xt + st.xf;
      const TerminalAction act = terminal_action(d.gains, st);
      const StateBundle next = step_true(m, st, act.u, act.vdes);
      const bool ok = g1.value(next.x1aug()) <= g1.lambda_star * g1.level * (1.0 + kRelTol) &&
                      g2.value(next.xtilde()) <= g2.lambda_star * g2.level * (1.0 + kRelTol) &&
                      m.input_box().contains(act.u, 1e-12);
      Vector w(n1a + n2);
      w << x1aug, xt;
      rec.check("contraction", ok, w, "successor leaves lambda G or u leaves U");
    }
    {
      const Vector x1 = g1.boundary_point(s.direction(n1a), g1.lambda) +
                        s.in_ball(n1a, distance_to_complement(g1));
      const Vector x2 = g2.boundary_point(s.direction(n2), g2.lambda) +
                        s.in_ball(n2, distance_to_complement(g2));
      rec.check("margin", g1.value(x1) <= g1.level * (1.0 + kRelTol), x1, "G1 margin");
      rec.check("margin", g2.value(x2) <= g2.level * (1.0 + kRelTol), x2, "G2 margin");
    }
    {
      Vector dx = Vector::Zero(n1a);
      for (int j = 0; j < horizon; ++j) dx = aug.a1aug * dx + aug.b1aug * s.in_ball(m.q(), b.eps_vtilde_max);
      rec.check("outer_chain", dx.norm() <= b.delta1 * (1.0 + kRelTol), dx,
                "x1aug(N) deviation exceeds Delta1");
    }
    {
      Vector dx2 = Vector::Zero(n2);
      bool ok = true;
      Vector worst;
      for (int i = 0; i < horizon; ++i) {
        dx2 = m.a2() * dx2 + m.b2() * s.in_ball(m.p(), b.delta_u_max);
        const Vector dxf = s.in_ball(n2, b.eps_xf_max);
        const Vector dv = m.c() * (dx2 - dxf);
        if (dv.norm() > b.eps_vtilde_max * (1.0 + kRelTol)) {
          ok = false;
          worst = dv;
        }
      }
      rec.check("inner_chain", ok, worst, "v~ deviation exceeds eps_vtilde_max");
    }
    {
      Vector dxf = Vector::Zero(n2);
      for (int j = 0; j < horizon; ++j) dxf = m.af() * dxf + m.bf() * s.in_ball(m.q(), b.delta_vdes_max);
      rec.check("ref_chain", dxf.norm() <= b.eps_xf_max * (1.0 + kRelTol), dxf,
                "xf(N) deviation exceeds eps_xf_max");
    }
  }
  return report;
}

}  // namespace hmpc
