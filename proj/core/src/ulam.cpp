#include "skel/ulam.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/parallel.hpp"
#include "skel/rng.hpp"

namespace skel {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'E', 'L', 'U', 'L', 'A', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "the operator file format is little-endian");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& what) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw Error(ErrorKind::parse, "operator file truncated while reading " + what);
  return v;
}

/// Points per axis of the jittered sub-grid; the remainder is drawn uniformly.
std::size_t strata_per_axis(std::size_t samples, std::size_t k) {
  auto q = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(samples), 1.0 / k)));
  while (q > 1 && static_cast<double>(std::pow(q, k)) > samples) --q;
  while (std::pow(q + 1, k) <= samples) ++q;
  return std::max<std::size_t>(q, 1);
}

}  // namespace

UlamOperator build_ulam(const BoxMap& map, std::vector<std::size_t> resolution,
                        std::size_t samples_per_cell, std::uint64_t seed) {
  for (auto r : resolution)
    if (r < 8) throw Error(ErrorKind::domain, "Ulam resolution must be at least 8 per axis");
  if (samples_per_cell < 16) throw Error(ErrorKind::domain, "need at least 16 samples per cell");
  if (!map.apply) throw Error(ErrorKind::domain, "map has no evaluation function");

  UlamOperator op;
  op.grid = UniformGrid(map.box, std::move(resolution));
  op.samples_per_cell = samples_per_cell;
  op.seed = seed;
  const UniformGrid& grid = op.grid;
  const std::size_t k = grid.dim();
  const std::size_t n = grid.cell_count();
  const std::size_t q = strata_per_axis(samples_per_cell, k);
  std::size_t stratified = 1;
  for (std::size_t a = 0; a < k; ++a) stratified *= q;

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> lo(k), x(k), y(k);
    std::vector<std::size_t> dest;
    dest.reserve(samples_per_cell);
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng = make_rng(seed, Stream::ulam, c);
      grid.cell_lower_corner(c, lo);
      dest.clear();
      for (std::size_t t = 0; t < samples_per_cell; ++t) {
        if (t < stratified) {
          std::size_t rem = t;
          for (std::size_t a = k; a-- > 0;) {
            const std::size_t s = rem % q;
            rem /= q;
            const double h = grid.cell_width(a) / static_cast<double>(q);
            x[a] = lo[a] + h * (static_cast<double>(s) + uniform(rng, 0.0, 1.0));
          }
        } else {
          for (std::size_t a = 0; a < k; ++a)
            x[a] = lo[a] + grid.cell_width(a) * uniform(rng, 0.0, 1.0);
        }
        map.apply(x, y);
        const std::size_t j = grid.locate(y, 1e-12);
        if (j >= n) {
          std::string coords;
          for (double v : y) coords += (coords.empty() ? "" : ", ") + format_number(v);
          throw ModelConsistencyError(map.name + " maps a sample of cell " + std::to_string(c) +
                                          " outside its box: (" + coords + ")",
                                      0);
        }
        dest.push_back(j);
      }
      std::sort(dest.begin(), dest.end());
      auto& row = rows[c];
      for (std::size_t i = 0; i < dest.size();) {
        std::size_t m = i;
        while (m < dest.size() && dest[m] == dest[i]) ++m;
        row.emplace_back(dest[i], m - i);
        i = m;
      }
    }
  });

  std::vector<Triplet> trip;
  const double inv = 1.0 / static_cast<double>(samples_per_cell);
  for (std::size_t c = 0; c < n; ++c)
    for (const auto& [j, count] : rows[c]) trip.push_back({c, j, static_cast<double>(count) * inv});
  op.P = SparseRowMatrix(n, n, std::move(trip));
  return op;
}

UlamOperator build_ulam(const PiecewiseSystem& system, std::vector<std::size_t> resolution,
                        std::size_t samples_per_cell, std::uint64_t seed) {
  return build_ulam(system.as_box_map(), std::move(resolution), samples_per_cell, seed);
}

UlamOperator ulam_from_matrix(UniformGrid grid, SparseRowMatrix P) {
  if (P.rows() != grid.cell_count() || P.cols() != grid.cell_count())
    throw Error(ErrorKind::domain, "matrix shape does not match the grid");
  for (std::size_t i = 0; i < P.rows(); ++i) {
    double s = 0.0;
    for (double v : P.row_values(i)) {
      if (v < 0.0) throw Error(ErrorKind::domain, "transition matrix has a negative entry");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12)
      throw Error(ErrorKind::domain, "row " + std::to_string(i) + " does not sum to 1");
  }
  UlamOperator op;
  op.grid = std::move(grid);
  op.P = std::move(P);
  return op;
}

double integral(const DensityField& h) {
  double s = 0.0;
  for (double v : h.values) s += v;
  return s * h.grid.cell_volume();
}

std::vector<double> masses(const DensityField& h) {
  std::vector<double> m(h.values.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = h.values[i] * h.grid.cell_volume();
  return m;
}

DensityField invariant_density(const UlamOperator& op, const InvariantDensityOptions& opt) {
  const std::size_t n = op.grid.cell_count();
  std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
  double step = 0.0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    op.P.left_multiply(p, next);
    double total = 0.0;
    for (double v : next) total += v;
    step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      step += std::fabs(next[i] - p[i]);
    }
    p.swap(next);
    if (step < opt.tol) {
      DensityField h(op.grid);
      for (std::size_t i = 0; i < n; ++i) h.values[i] = p[i] / op.grid.cell_volume();
      return h;
    }
  }
  throw ConvergenceError("invariant density did not converge in " +
                             std::to_string(opt.max_iter) + " iterations (last L1 step " +
                             format_number(step) + ")",
                         step, opt.max_iter);
}

double fixed_point_residual(const UlamOperator& op, const DensityField& h) {
  const std::vector<double> m = masses(h);
  std::vector<double> pushed(m.size());
  op.P.left_multiply(m, pushed);
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) r += std::fabs(pushed[i] - m[i]);
  return r;
}

GridFunction marginal_density(const DensityField& h, std::size_t j) {
  const UniformGrid& g = h.grid;
  if (j >= g.dim()) throw Error(ErrorKind::domain, "marginal axis out of range");
  const std::size_t n = g.resolution()[j];
  const Box& b = g.box();
  const double scale = b.width(j) / b.width(0);
  GridFunction out(UniformGrid(Box{{b.lo[0]}, {b.hi[0]}}, std::vector<std::size_t>{n}));
  std::vector<double> mass(n, 0.0);
  std::vector<std::size_t> m(g.dim());
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    g.multi_index(i, m);
    mass[m[j]] += h.values[i] * g.cell_volume();
  }
  // density of z_j is mass / cell_width(j); substituting z_j = scale * u multiplies by scale
  for (std::size_t i = 0; i < n; ++i) out.values[i] = scale * mass[i] / g.cell_width(j);
  return out;
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  if (a.values.size() != b.values.size())
    throw Error(ErrorKind::domain, "densities live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::fabs(a.values[i] - b.values[i]);
  return s * a.grid.cell_volume();
}

void save_ulam(const UlamOperator& op, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(op.grid.dim()));
  for (std::size_t a = 0; a < op.grid.dim(); ++a) {
    put<double>(os, op.grid.box().lo[a]);
    put<double>(os, op.grid.box().hi[a]);
    put<std::uint64_t>(os, op.grid.resolution()[a]);
  }
  put<std::uint64_t>(os, op.samples_per_cell);
  put<std::uint64_t>(os, op.seed);
  put<std::uint64_t>(os, op.P.nnz());
  for (const auto& t : op.P.triplets()) {
    put<std::uint64_t>(os, t.row);
    put<std::uint64_t>(os, t.col);
    put<double>(os, t.value);
  }
  if (!os) throw Error(ErrorKind::io, "failed writing " + path.string());
}

UlamOperator load_ulam(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorKind::parse, path.string() + " is not an operator file");
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kFormatVersion)
    throw Error(ErrorKind::parse, "unsupported operator file version " + std::to_string(version));
  const auto k = get<std::uint32_t>(is, "dimension");
  if (k == 0 || k > 64) throw Error(ErrorKind::parse, "implausible operator dimension");
  Box box;
  std::vector<std::size_t> res;
  for (std::uint32_t a = 0; a < k; ++a) {
    box.lo.push_back(get<double>(is, "box"));
    box.hi.push_back(get<double>(is, "box"));
    res.push_back(get<std::uint64_t>(is, "resolution"));
  }
  UlamOperator op;
  op.grid = UniformGrid(box, res);
  op.samples_per_cell = get<std::uint64_t>(is, "samples");
  op.seed = get<std::uint64_t>(is, "seed");
  const auto nnz = get<std::uint64_t>(is, "nnz");
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    Triplet e;
    e.row = get<std::uint64_t>(is, "triplet");
    e.col = get<std::uint64_t>(is, "triplet");
    e.value = get<double>(is, "triplet");
    t.push_back(e);
  }
  const std::size_t n = op.grid.cell_count();
  op.P = SparseRowMatrix(n, n, std::move(t));
  return op;
}

void write_marginal_csv(const GridFunction& marginal, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"u", "density"};
  Point c(1);
  for (std::size_t i = 0; i < marginal.values.size(); ++i) {
    marginal.grid.cell_center(i, c);
    t.rows.push_back({c[0], marginal.values[i]});
  }
  write_csv(t, path);
}

}  // namespace skel
