#include "mimodpd/gmp.hpp"

#include <cmath>
#include <string>

namespace mimodpd {

void GmpStructure::validate() const {
  require(order >= 1 && memory >= 0 && cross_terms >= 0, ErrorCode::kInvalidArgument,
          "gmp: need order >= 1, memory >= 0, cross_terms >= 0");
}

GmpModel GmpModel::zeros(const GmpStructure& s) {
  s.validate();
  GmpModel m;
  m.structure = s;
  m.a = CMat::Zero(s.order, s.taps());
  const std::size_t nc = static_cast<std::size_t>(s.order - 1) * s.taps() * s.cross_terms;
  m.c.assign(nc, cplx(0.0));
  m.e.assign(nc, cplx(0.0));
  return m;
}

GmpModel GmpModel::identity(const GmpStructure& s) {
  GmpModel m = zeros(s);
  m.a(0, 0) = 1.0;
  return m;
}

void GmpModel::check() const {
  structure.validate();
  const std::size_t nc =
      static_cast<std::size_t>(structure.order - 1) * structure.taps() * structure.cross_terms;
  require(a.rows() == structure.order && a.cols() == structure.taps() && c.size() == nc &&
              e.size() == nc,
          ErrorCode::kShapeMismatch, "gmp: coefficient tensors do not match structure");
}

std::vector<cplx> GmpModel::flatten() const {
  std::vector<cplx> t;
  t.reserve(structure.coeff_count());
  for (int q = 0; q < structure.order; ++q)
    for (int m = 0; m < structure.taps(); ++m) t.push_back(a(q, m));
  t.insert(t.end(), c.begin(), c.end());
  t.insert(t.end(), e.begin(), e.end());
  return t;
}

GmpModel GmpModel::unflatten(const GmpStructure& s, const std::vector<cplx>& theta,
                             double sat_level) {
  require(static_cast<int>(theta.size()) == s.coeff_count(), ErrorCode::kShapeMismatch,
          "gmp: coefficient vector length mismatch");
  GmpModel m = zeros(s);
  m.sat_level = sat_level;
  std::size_t i = 0;
  for (int q = 0; q < s.order; ++q)
    for (int k = 0; k < s.taps(); ++k) m.a(q, k) = theta[i++];
  for (auto& v : m.c) v = theta[i++];
  for (auto& v : m.e) v = theta[i++];
  return m;
}

cplx clamp_magnitude(cplx u, double sat_level) {
  if (sat_level <= 0.0) return u;
  const double r = std::abs(u);
  return r > sat_level ? u * (sat_level / r) : u;
}

namespace {

// Powers |u[n]|^q for q = 0..order-1, row per sample.
std::vector<double> envelope_powers(const cplx* u, std::size_t n, int order) {
  std::vector<double> p(n * order);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(u[i]);
    double acc = 1.0;
    for (int q = 0; q < order; ++q) {
      p[i * order + q] = acc;
      acc *= r;
    }
  }
  return p;
}

}  // namespace

void gmp_forward(const GmpModel& model, const cplx* u_in, std::size_t n, cplx* y) {
  model.check();
  const auto& s = model.structure;
  std::vector<cplx> u(u_in, u_in + n);
  for (auto& v : u) v = clamp_magnitude(v, model.sat_level);
  const auto env = envelope_powers(u.data(), n, s.order);
  const long N = static_cast<long>(n);
  auto env_at = [&](long idx, int q) -> double {
    if (idx < 0 || idx >= N) return q == 0 ? 1.0 : 0.0;
    return env[static_cast<std::size_t>(idx) * s.order + q];
  };
  for (long i = 0; i < N; ++i) {
    cplx acc = 0.0;
    for (int m = 0; m < s.taps(); ++m) {
      const long j = i - m;
      if (j < 0) continue;
      const cplx um = u[j];
      cplx poly = 0.0;
      for (int q = 0; q < s.order; ++q) poly += model.a(q, m) * env_at(j, q);
      for (int q = 1; q < s.order; ++q)
        for (int g = 1; g <= s.cross_terms; ++g)
          poly += model.c_at(q, m, g) * env_at(j - g, q) + model.e_at(q, m, g) * env_at(j + g, q);
      acc += um * poly;
    }
    y[i] = acc;
  }
}

std::vector<cplx> gmp_forward(const GmpModel& model, const std::vector<cplx>& u) {
  std::vector<cplx> y(u.size());
  gmp_forward(model, u.data(), u.size(), y.data());
  return y;
}

CMat gmp_regressor(const GmpStructure& s, const cplx* u, std::size_t n) {
  const auto env = envelope_powers(u, n, s.order);
  const long N = static_cast<long>(n);
  auto env_at = [&](long idx, int q) -> double {
    if (idx < 0 || idx >= N) return 0.0;
    return env[static_cast<std::size_t>(idx) * s.order + q];
  };
  CMat phi = CMat::Zero(static_cast<Eigen::Index>(n), s.coeff_count());
  const int nc = (s.order - 1) * s.taps() * s.cross_terms;
  const int base_c = s.order * s.taps();
  const int base_e = base_c + nc;
  for (long i = 0; i < N; ++i) {
    for (int m = 0; m < s.taps(); ++m) {
      const long j = i - m;
      if (j < 0) continue;
      const cplx um = u[j];
      for (int q = 0; q < s.order; ++q) phi(i, q * s.taps() + m) = um * env_at(j, q);
      for (int q = 1; q < s.order; ++q)
        for (int g = 1; g <= s.cross_terms; ++g) {
          const int off = ((q - 1) * s.taps() + m) * s.cross_terms + (g - 1);
          phi(i, base_c + off) = um * env_at(j - g, q);
          phi(i, base_e + off) = um * env_at(j + g, q);
        }
    }
  }
  return phi;
}

GmpFit fit_gmp_ls(const std::vector<cplx>& inputs, const std::vector<cplx>& outputs,
                  const GmpStructure& s, double ridge, double max_condition,
                  std::size_t segment) {
  s.validate();
  require(inputs.size() == outputs.size(), ErrorCode::kShapeMismatch,
          "fit_gmp_ls: input/output length mismatch");
  const int P = s.coeff_count();
  require(inputs.size() >= 3u * static_cast<std::size_t>(P), ErrorCode::kInvalidArgument,
          "fit_gmp_ls: need at least 3x as many samples as coefficients");
  require(ridge >= 0.0, ErrorCode::kInvalidArgument, "fit_gmp_ls: ridge must be >= 0");

  double pw = 0.0;
  for (const auto& v : inputs) pw += std::norm(v);
  const double rms = std::sqrt(pw / inputs.size());
  require(rms > 0.0 && std::isfinite(rms), ErrorCode::kInvalidArgument,
          "fit_gmp_ls: input has zero or non-finite power");
  std::vector<cplx> un(inputs.size());
  for (std::size_t i = 0; i < un.size(); ++i) un[i] = inputs[i] / rms;

  const auto n = static_cast<Eigen::Index>(inputs.size());
  if (segment == 0) segment = un.size();
  require(un.size() % segment == 0, ErrorCode::kShapeMismatch,
          "fit_gmp_ls: length is not a multiple of the segment");
  CMat phi(n, P);
  for (std::size_t off = 0; off < un.size(); off += segment)
    phi.middleRows(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(segment)) =
        gmp_regressor(s, un.data() + off, segment);
  CVec y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = outputs[i];

  CMat lhs = phi;
  CVec rhs = y;
  if (ridge > 0.0) {
    lhs.conservativeResize(n + P, P);
    lhs.bottomRows(P) = CMat::Identity(P, P) * std::sqrt(ridge);
    rhs.conservativeResize(n + P);
    rhs.tail(P).setZero();
  }
  Eigen::HouseholderQR<CMat> qr(lhs);
  const CMat r = qr.matrixQR().topRows(P).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<CMat> svd(r);
  const auto& sv = svd.singularValues();
  const double cond = sv(P - 1) > 0.0 ? sv(0) / sv(P - 1) : INFINITY;
  if (ridge == 0.0 && !(cond <= max_condition))
    fail(ErrorCode::kIllConditioned,
         "fit_gmp_ls: regressor condition number " + std::to_string(cond) + " exceeds limit");
  CVec theta = qr.solve(rhs);

  GmpFit fit;
  const CVec resid = phi * theta - y;
  fit.nmse_db = 10.0 * std::log10(resid.squaredNorm() / y.squaredNorm());
  fit.condition = cond;
  std::vector<cplx> t(P);
  for (int i = 0; i < P; ++i) t[i] = theta(i);
  // Undo the unit-RMS input scaling: a term of order q scales as rms^-(q+1).
  GmpModel m = GmpModel::unflatten(s, t);
  for (int q = 0; q < s.order; ++q) m.a.row(q) /= std::pow(rms, q + 1);
  for (int q = 1; q < s.order; ++q)
    for (int k = 0; k < s.taps(); ++k)
      for (int g = 1; g <= s.cross_terms; ++g) {
        const double f = std::pow(rms, q + 1);
        m.c_at(q, k, g) /= f;
        m.e_at(q, k, g) /= f;
      }
  fit.model = std::move(m);
  return fit;
}

std::vector<cplx> gmp_forward_segmented(const GmpModel& model, const std::vector<cplx>& u,
                                        std::size_t segment) {
  if (segment == 0) segment = u.size();
  require(segment > 0 && u.size() % segment == 0, ErrorCode::kShapeMismatch,
          "gmp_forward_segmented: length is not a multiple of the segment");
  std::vector<cplx> y(u.size());
  for (std::size_t off = 0; off < u.size(); off += segment)
    gmp_forward(model, u.data() + off, segment, y.data() + off);
  return y;
}

double nmse_db(const std::vector<cplx>& actual, const std::vector<cplx>& reference) {
  require(actual.size() == reference.size(), ErrorCode::kShapeMismatch,
          "nmse: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    num += std::norm(actual[i] - reference[i]);
    den += std::norm(reference[i]);
  }
  require(den > 0.0, ErrorCode::kInvalidArgument, "nmse: zero reference power");
  return 10.0 * std::log10(num / den);
}

}  // namespace mimodpd
