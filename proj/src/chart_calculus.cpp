#include "sphvar/chart_calculus.hpp"

namespace sphvar {

ChartFrame chart_frame(const SpherePoint& x) {
  ChartFrame f;
  f.chart = chart_for(x.coords());
  f.u = f.chart.to_chart(x.coords());
  f.scale = Chart::scale(f.u);
  f.frame = f.chart.basis(f.u) / f.scale;
  return f;
}

namespace {

// Coordinate components of a pulled-back 2-tensor near u, packed row-major.
using PairSampler = std::function<double(const MapJet& jet, const Vec& A, const Vec& B)>;

struct CoordinateTensor {
  Mat value;                        // coordinate components at u0
  std::vector<Eigen::VectorXd> dt;  // d_c of the packed components
};

CoordinateTensor sample_tensor(const MapSpec& map, const ChartFrame& cf, const PairSampler& pair,
                               const FdSteps& steps) {
  const int m = cf.chart.dim();
  auto packed = [&](const Vec& u) {
    const Vec x = cf.chart.to_sphere(u);
    const Mat basis = cf.chart.basis(u);
    const MapJet jet = eval_jet(map, SpherePoint::normalized(x), 1);
    Eigen::VectorXd t(m * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) t(a * m + b) = pair(jet, basis.col(a), basis.col(b));
    return t;
  };
  CoordinateTensor out;
  const Eigen::VectorXd t0 = packed(cf.u);
  out.value.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.value(a, b) = t0(a * m + b);
  out.dt = chart_partials(packed, cf.u, steps.first);
  return out;
}

// Orthonormal components of nabla T from coordinate data.
Tensor3 covariant_components(const CoordinateTensor& t, const ChartFrame& cf) {
  const int m = static_cast<int>(t.value.rows());
  Tensor3 out(m);
  const double s3 = cf.scale * cf.scale * cf.scale;
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        double v = t.dt[c](a * m + b);
        for (int d = 0; d < m; ++d) {
          v -= Chart::christoffel(d, c, a, cf.u) * t.value(d, b);
          v -= Chart::christoffel(d, c, b, cf.u) * t.value(a, d);
        }
        out(c, a, b) = v / s3;
      }
    }
  }
  return out;
}

}  // namespace

TwoFormJet pullback_two_form(const MapSpec& map, const SpherePoint& x, const FdSteps& steps) {
  const TargetGeometry target = map.target();
  if (!target.is_surface()) throw InvalidArgument("phi*Omega needs a surface target, got " + map.id());
  TwoFormJet r;
  r.frame = chart_frame(x);
  const int m = x.dim();
  const auto coord = sample_tensor(
      map, r.frame,
      [&](const MapJet& jet, const Vec& A, const Vec& B) {
        return target.omega(jet.value, jet.push(A), jet.push(B));
      },
      steps);
  const double s = r.frame.scale;
  r.sigma = coord.value / (s * s);
  r.nabla = covariant_components(coord, r.frame);
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) r.nabla_norm2 += r.nabla(c, a, b) * r.nabla(c, a, b);
  // Partial derivatives suffice for d; the connection terms cancel.
  const double s3 = s * s * s;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      for (int c = b + 1; c < m; ++c) {
        const double d = (coord.dt[a](b * m + c) + coord.dt[b](c * m + a) + coord.dt[c](a * m + b)) / s3;
        r.d_norm2 += d * d;
      }
    }
  }
  r.delta = Vec::Zero(m);
  for (int b = 0; b < m; ++b) {
    double acc = 0.0;
    for (int a = 0; a < m; ++a) acc -= r.nabla(a, a, b);
    r.delta(b) = acc;
  }
  r.delta_norm2 = r.delta.squaredNorm();
  r.delta_sharp = r.frame.frame * r.delta;
  return r;
}

SymmetricJet pullback_metric_jet(const MapSpec& map, const SpherePoint& x, const FdSteps& steps) {
  SymmetricJet r;
  r.frame = chart_frame(x);
  const int m = x.dim();
  const auto coord = sample_tensor(
      map, r.frame, [](const MapJet& jet, const Vec& A, const Vec& B) { return jet.push(A).dot(jet.push(B)); },
      steps);
  const double s = r.frame.scale;
  r.value = coord.value / (s * s);
  r.nabla = covariant_components(coord, r.frame);
  for (double v : r.nabla.data) r.nabla_norm2 += v * v;
  (void)m;
  return r;
}

Vec vector_form_trace(const MapSpec& map, const SpherePoint& x, const VectorFormSampler& form, int jet_order,
                      const FdSteps& steps) {
  const ChartFrame cf = chart_frame(x);
  const int m = x.dim();
  const TargetGeometry target = map.target();
  const int n1 = target.n + 1;
  auto packed = [&](const Vec& u) {
    const Vec p = cf.chart.to_sphere(u);
    const Mat basis = cf.chart.basis(u);
    const MapJet jet = eval_jet(map, SpherePoint::normalized(p), jet_order);
    const Mat W = form(jet);
    Eigen::VectorXd t(n1 * m);
    for (int a = 0; a < m; ++a) t.segment(a * n1, n1) = W * basis.col(a);
    return t;
  };
  const Eigen::VectorXd w0 = packed(cf.u);
  const auto dw = chart_partials(packed, cf.u, steps.first);
  const Vec y = map.value(x.coords());
  Vec acc = Vec::Zero(n1);
  for (int a = 0; a < m; ++a) {
    Vec term = target.project(y, Vec(dw[a].segment(a * n1, n1)));
    for (int d = 0; d < m; ++d) term -= Chart::christoffel(d, a, a, cf.u) * Vec(w0.segment(d * n1, n1));
    acc += term;
  }
  return acc / (cf.scale * cf.scale);
}

namespace {

Mat cauchy_green_form(const MapJet& jet) {
  const Mat A = jet.ambient_differential();
  return A * A.transpose() * A;
}

}  // namespace

Vec cauchy_green_divergence(const MapSpec& map, const SpherePoint& x, const FdSteps& steps) {
  return vector_form_trace(map, x, cauchy_green_form, 1, steps);
}

Vec sigma2_tension(const MapSpec& map, const SpherePoint& x, const FdSteps& steps) {
  return vector_form_trace(
      map, x,
      [](const MapJet& jet) {
        const Mat A = jet.ambient_differential();
        return Mat(jet.dphi.squaredNorm() * A - cauchy_green_form(jet));
      },
      1, steps);
}

double one_form_d_norm2(const MapSpec& map, const SpherePoint& x, const CovectorSampler& beta, int jet_order,
                        const FdSteps& steps) {
  const ChartFrame cf = chart_frame(x);
  const int m = x.dim();
  auto packed = [&](const Vec& u) {
    const Vec p = cf.chart.to_sphere(u);
    const Mat basis = cf.chart.basis(u);
    const MapJet jet = eval_jet(map, SpherePoint::normalized(p), jet_order);
    return Eigen::VectorXd(basis.transpose() * beta(jet));
  };
  const auto db = chart_partials(packed, cf.u, steps.first);
  const double s2 = cf.scale * cf.scale;
  double acc = 0.0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const double d = (db[a](b) - db[b](a)) / s2;
      acc += d * d;
    }
  }
  return acc;
}

}  // namespace sphvar
