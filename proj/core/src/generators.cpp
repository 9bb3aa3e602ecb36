#include "kaplan/generators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "kaplan/error.hpp"

namespace kaplan {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxTreeVertices = 20'000'000;

void require_positive(const std::vector<unsigned>& values) {
  for (unsigned v : values) {
    if (v == 0) throw Error(ErrorCode::ZeroBranching, "branching function must satisfy b(r) >= 1");
  }
}

}  // namespace

BranchingFunction BranchingFunction::constant(unsigned b) { return eventually_periodic({}, {b}); }

BranchingFunction BranchingFunction::eventually_periodic(std::vector<unsigned> prefix, std::vector<unsigned> cycle) {
  if (cycle.empty()) throw Error(ErrorCode::BadParameter, "branching cycle must be nonempty");
  require_positive(prefix);
  require_positive(cycle);
  BranchingFunction bf;
  bf.kind_ = Kind::EventuallyPeriodic;
  bf.prefix_ = std::move(prefix);
  bf.cycle_ = std::move(cycle);
  return bf;
}

BranchingFunction BranchingFunction::affine(unsigned b0, unsigned slope) {
  if (b0 == 0) throw Error(ErrorCode::ZeroBranching, "branching function must satisfy b(r) >= 1");
  BranchingFunction bf;
  bf.kind_ = Kind::Affine;
  bf.prefix_.clear();
  bf.cycle_.clear();
  bf.b0_ = b0;
  bf.slope_ = slope;
  return bf;
}

BranchingFunction BranchingFunction::from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    auto read_list = [&](const char* key) {
      std::vector<unsigned> out;
      if (!j.contains(key)) return out;
      for (const auto& v : j.at(key)) {
        const auto value = v.get<long long>();
        if (value < 0) throw Error(ErrorCode::ZeroBranching, "branching values must be positive");
        out.push_back(static_cast<unsigned>(value));
      }
      return out;
    };
    if (kind == "constant") {
      const auto b = j.at("b").get<long long>();
      if (b <= 0) throw Error(ErrorCode::ZeroBranching, "branching function must satisfy b(r) >= 1");
      return constant(static_cast<unsigned>(b));
    }
    if (kind == "periodic") return eventually_periodic(read_list("prefix"), read_list("cycle"));
    if (kind == "affine") {
      const auto b0 = j.at("b0").get<long long>();
      const auto slope = j.value("slope", 0LL);
      if (b0 <= 0) throw Error(ErrorCode::ZeroBranching, "branching function must satisfy b(r) >= 1");
      if (slope < 0) throw Error(ErrorCode::BadParameter, "affine branching needs slope >= 0");
      return affine(static_cast<unsigned>(b0), static_cast<unsigned>(slope));
    }
    throw Error(ErrorCode::BadParameter, "unknown branching kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("branching function: ") + e.what());
  }
}

json BranchingFunction::to_json() const {
  if (kind_ == Kind::Affine) return {{"kind", "affine"}, {"b0", b0_}, {"slope", slope_}};
  if (prefix_.empty() && cycle_.size() == 1) return {{"kind", "constant"}, {"b", cycle_.front()}};
  return {{"kind", "periodic"}, {"prefix", prefix_}, {"cycle", cycle_}};
}

unsigned BranchingFunction::operator()(int r) const {
  if (r < 0) throw Error(ErrorCode::BadParameter, "branching function is defined on r >= 0");
  const auto ur = static_cast<std::size_t>(r);
  if (kind_ == Kind::Affine) return b0_ + slope_ * static_cast<unsigned>(r);
  if (ur < prefix_.size()) return prefix_[ur];
  return cycle_[(ur - prefix_.size()) % cycle_.size()];
}

std::optional<unsigned> BranchingFunction::sup() const {
  if (kind_ == Kind::Affine) {
    if (slope_ > 0) return std::nullopt;
    return b0_;
  }
  unsigned best = *std::max_element(cycle_.begin(), cycle_.end());
  for (unsigned v : prefix_) best = std::max(best, v);
  return best;
}

bool BranchingFunction::is_constant() const {
  if (kind_ == Kind::Affine) return slope_ == 0;
  const unsigned c = cycle_.front();
  return std::all_of(cycle_.begin(), cycle_.end(), [c](unsigned v) { return v == c; }) &&
         std::all_of(prefix_.begin(), prefix_.end(), [c](unsigned v) { return v == c; });
}

std::vector<double> BranchingFunction::shell_sizes(int depth) const {
  std::vector<double> s(static_cast<std::size_t>(depth) + 1, 1.0);
  for (int r = 0; r < depth; ++r) {
    s[static_cast<std::size_t>(r) + 1] = s[static_cast<std::size_t>(r)] * (*this)(r);
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

json tree_params(const BranchingFunction& b, int depth, const char* representation) {
  json p = {{"branching", b.to_json()}, {"depth", depth}, {"representation", representation}};
  if (const auto sup = b.sup()) {
    p["sup_branching"] = *sup;
  } else {
    p["sup_branching"] = "unbounded";
  }
  return p;
}

void check_depth(int depth) {
  if (depth < 1) throw Error(ErrorCode::BadParameter, "tree depth must be at least 1");
}

}  // namespace

TreeTruncation model_tree(const BranchingFunction& b, int depth) {
  check_depth(depth);
  const auto sizes = b.shell_sizes(depth);
  double total = 0.0;
  for (double s : sizes) total += s;
  if (total > static_cast<double>(kMaxTreeVertices)) {
    throw Error(ErrorCode::BadParameter, "tree with " + std::to_string(static_cast<long long>(total)) +
                                             " vertices is too large; use the shell-quotient representation");
  }
  const auto n = static_cast<std::size_t>(total);
  std::vector<std::size_t> offset(sizes.size() + 1, 0);
  for (std::size_t r = 0; r < sizes.size(); ++r) offset[r + 1] = offset[r] + static_cast<std::size_t>(sizes[r]);

  GraphSpec spec;
  spec.mu.assign(n, 1.0);
  spec.boundary.assign(n, false);
  spec.edges.reserve(n - 1);
  for (int r = 0; r < depth; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    const unsigned br = b(r);
    for (std::size_t i = 0; i < static_cast<std::size_t>(sizes[ur]); ++i) {
      const auto parent = static_cast<Vertex>(offset[ur] + i);
      for (unsigned j = 0; j < br; ++j) {
        spec.edges.push_back({parent, static_cast<Vertex>(offset[ur + 1] + i * br + j), 1.0});
      }
    }
  }
  for (std::size_t x = offset[static_cast<std::size_t>(depth)]; x < n; ++x) spec.boundary[x] = true;
  spec.family = {"tree", tree_params(b, depth, "full")};

  TreeTruncation t;
  t.graph = WeightedGraph::build(std::move(spec));
  t.root = 0;
  t.branching = b;
  t.depth = depth;
  t.shells.origin = {0};
  t.shells.radius_of.assign(n, 0);
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    std::vector<Vertex> shell(offset[r + 1] - offset[r]);
    for (std::size_t i = 0; i < shell.size(); ++i) {
      shell[i] = static_cast<Vertex>(offset[r] + i);
      t.shells.radius_of[offset[r] + i] = static_cast<int>(r);
    }
    t.shells.shells.push_back(std::move(shell));
    t.shells.shell_measure.push_back(sizes[r]);
  }
  return t;
}

TreeTruncation homogeneous_tree(unsigned b, int depth) { return model_tree(BranchingFunction::constant(b), depth); }

TreeTruncation model_tree_quotient(const BranchingFunction& b, int depth) {
  check_depth(depth);
  const auto sizes = b.shell_sizes(depth);
  GraphSpec spec;
  spec.mu = sizes;
  spec.boundary.assign(sizes.size(), false);
  spec.boundary.back() = true;
  for (int r = 0; r < depth; ++r) {
    spec.edges.push_back({static_cast<Vertex>(r), static_cast<Vertex>(r + 1), sizes[static_cast<std::size_t>(r) + 1]});
  }
  spec.family = {"tree", tree_params(b, depth, "shell_quotient")};

  TreeTruncation t;
  t.graph = WeightedGraph::build(std::move(spec));
  t.root = 0;
  t.branching = b;
  t.depth = depth;
  const Vertex origin[] = {0};
  t.shells = shell_decomposition(t.graph, origin);
  return t;
}

// ---------------------------------------------------------------------------

LatticeTruncation lattice_ball(LatticeSpec ls) {
  if (ls.dim < 1) throw Error(ErrorCode::BadParameter, "lattice dimension must be at least 1");
  if (ls.radius < 1) throw Error(ErrorCode::BadParameter, "lattice radius must be at least 1");
  const int n_dim = ls.dim;
  const long long r2 = static_cast<long long>(ls.radius) * ls.radius;
  const int side = 2 * ls.radius + 1;
  double box = std::pow(static_cast<double>(side), n_dim);
  if (box > 5e7) throw Error(ErrorCode::BadParameter, "lattice ball too large");

  // Enumerate the bounding box in lexicographic order and keep |x| <= radius.
  std::vector<int> flat;
  std::unordered_map<long long, Vertex> index;
  std::vector<int> x(static_cast<std::size_t>(n_dim), -ls.radius);
  auto key = [&](const std::vector<int>& c) {
    long long k = 0;
    for (int v : c) k = k * (side + 2) + (v + ls.radius + 1);
    return k;
  };
  auto norm2 = [](const std::vector<int>& c) {
    long long s = 0;
    for (int v : c) s += static_cast<long long>(v) * v;
    return s;
  };
  while (true) {
    if (norm2(x) <= r2) {
      index.emplace(key(x), static_cast<Vertex>(flat.size() / static_cast<std::size_t>(n_dim)));
      flat.insert(flat.end(), x.begin(), x.end());
    }
    int d = n_dim - 1;
    while (d >= 0 && x[static_cast<std::size_t>(d)] == ls.radius) {
      x[static_cast<std::size_t>(d)] = -ls.radius;
      --d;
    }
    if (d < 0) break;
    ++x[static_cast<std::size_t>(d)];
  }
  const std::size_t n = flat.size() / static_cast<std::size_t>(n_dim);

  GraphSpec spec;
  spec.mu.assign(n, 2.0 * n_dim);
  spec.boundary.assign(n, false);
  std::vector<int> y(static_cast<std::size_t>(n_dim));
  for (std::size_t v = 0; v < n; ++v) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(v * static_cast<std::size_t>(n_dim)), n_dim, y.begin());
    for (int d = 0; d < n_dim; ++d) {
      for (int step : {-1, 1}) {
        y[static_cast<std::size_t>(d)] += step;
        if (norm2(y) > r2) {
          spec.boundary[v] = true;
        } else if (step == 1) {
          spec.edges.push_back({static_cast<Vertex>(v), index.at(key(y)), 1.0});
        }
        y[static_cast<std::size_t>(d)] -= step;
      }
    }
  }
  spec.family = {"lattice", {{"dim", ls.dim}, {"radius", ls.radius}}};
  spec.coords = LatticeCoordinates{n_dim, std::move(flat)};

  LatticeTruncation t;
  std::vector<int> zero(static_cast<std::size_t>(n_dim), 0);
  t.origin = index.at(key(zero));
  t.graph = WeightedGraph::build(std::move(spec));
  t.metric = GraphMetric::make(t.graph, MetricKind::LatticeEuclidean);
  t.spec = ls;
  return t;
}

}  // namespace kaplan
