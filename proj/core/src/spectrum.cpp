#include "skel/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/rng.hpp"

namespace skel {

namespace {

Spectrum sorted_spectrum(const Eigen::VectorXcd& ev, std::size_t count, double unit_threshold) {
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    return a.imag() > b.imag();
  });
  Spectrum s;
  for (std::size_t i = 0; i < std::min(count, v.size()); ++i) {
    s.eigenvalues.push_back(v[i]);
    s.moduli.push_back(std::abs(v[i]));
  }
  for (double m : s.moduli)
    if (m >= unit_threshold) ++s.unit_count;
  return s;
}

}  // namespace

Spectrum leading_spectrum(const UlamOperator& op, std::size_t count, const SpectrumOptions& opt) {
  if (count < 2) throw Error(ErrorKind::domain, "leading_spectrum needs count >= 2");
  const std::size_t n = op.P.rows();
  if (n == 0) throw Error(ErrorKind::domain, "empty operator");
  std::size_t block = std::min(n, count + opt.extra_vectors);
  const std::size_t cap = std::max(block, std::min(n, opt.max_block));

  auto orthonormalize = [](Eigen::MatrixXd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    M = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
  };
  Rng rng = make_rng(kDefaultSeed, Stream::ulam, 0xE16E);
  auto widen = [&](Eigen::MatrixXd& V, std::size_t cols) {
    const Eigen::Index old = V.cols();
    V.conservativeResize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = old; j < V.cols(); ++j)
      for (Eigen::Index i = 0; i < V.rows(); ++i)
        V(i, j) = j == 0 ? 1.0 : uniform(rng, -1.0, 1.0);
    orthonormalize(V);
  };
  Eigen::MatrixXd V(static_cast<Eigen::Index>(n), 0);
  widen(V, block);

  std::vector<double> previous;
  double change = std::numeric_limits<double>::infinity();
  std::size_t since_widen = 0;
  constexpr std::size_t kCheckEvery = 5;
  for (std::size_t it = 1; it <= opt.max_iter; ++it, ++since_widen) {
    Eigen::MatrixXd W = op.P.right_multiply(V);
    if (it % kCheckEvery == 0 || it == opt.max_iter || block == n) {
      const Eigen::MatrixXd H = V.transpose() * W;
      Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
      if (es.info() != Eigen::Success)
        throw Error(ErrorKind::spectral, "Rayleigh-Ritz eigensolver failed");
      Spectrum s = sorted_spectrum(es.eigenvalues(), count, opt.unit_threshold);
      if (!previous.empty()) {
        change = 0.0;
        for (std::size_t i = 0; i < s.moduli.size(); ++i)
          change = std::max(change, std::fabs(s.moduli[i] - previous[i]));
      }
      previous = s.moduli;
      if (change < opt.tol || block == n) {
        s.iterations = it;
        s.residual = block == n ? 0.0 : change;
        return s;
      }
    }
    V = std::move(W);
    orthonormalize(V);
    if (since_widen >= opt.stall_iterations && block < cap) {
      block = std::min(cap, 2 * block);
      widen(V, block);
      previous.clear();
      since_widen = 0;
    }
  }
  throw Error(ErrorKind::spectral, "subspace iteration stagnated after " +
                                       std::to_string(opt.max_iter) + " iterations at block " +
                                       std::to_string(block) + " (last change " +
                                       format_number(change) + ")");
}

Spectrum dense_spectrum(const UlamOperator& op, std::size_t count, double unit_threshold) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.P.to_dense(), false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::spectral, "dense eigensolver failed");
  return sorted_spectrum(es.eigenvalues(), count, unit_threshold);
}

void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"index", "modulus", "real", "imag"};
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    t.rows.push_back({static_cast<double>(i), s.moduli[i], s.eigenvalues[i].real(),
                      s.eigenvalues[i].imag()});
  write_csv(t, path);
}

nlohmann::json to_json(const Spectrum& s) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : s.eigenvalues) ev.push_back({e.real(), e.imag()});
  return {{"moduli", s.moduli},       {"eigenvalues", ev},        {"q_hat", s.q_hat()},
          {"unit_count", s.unit_count}, {"iterations", s.iterations}, {"residual", s.residual}};
}

}  // namespace skel
