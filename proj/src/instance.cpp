#include "engdiv/instance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "engdiv/error.hpp"

namespace engdiv {

namespace {

void check_shape(const TypeUserMatrix& m, std::size_t T, std::size_t n, const char* name) {
  if (static_cast<std::size_t>(m.rows()) != T || static_cast<std::size_t>(m.cols()) != n) {
    std::ostringstream os;
    os << name << " has shape " << m.rows() << "x" << m.cols() << ", expected " << T << "x"
       << n;
    throw ShapeError(os.str());
  }
}

}  // namespace

Instance Instance::create(std::size_t n, std::size_t T, std::vector<Edge> edges,
                          TypeUserMatrix p, std::optional<TypeUserMatrix> e,
                          std::vector<std::string>* warnings) {
  if (T == 0) throw ShapeError("instance needs at least one type");
  check_shape(p, T, n, "p");
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      const double v = p(t, i);
      if (!std::isfinite(v) || v < 0.0 || v >= 1.0) {
        std::ostringstream os;
        os << "p[" << t << "][" << i << "] = " << v << " is outside [0, 1)";
        throw RangeError(os.str());
      }
    }
  }
  if (e) {
    check_shape(*e, T, n, "e");
    for (Eigen::Index t = 0; t < e->rows(); ++t) {
      for (Eigen::Index i = 0; i < e->cols(); ++i) {
        const double v = (*e)(t, i);
        if (!std::isfinite(v) || v < 0.0) {
          std::ostringstream os;
          os << "e[" << t << "][" << i << "] = " << v << " is negative or not finite";
          throw RangeError(os.str());
        }
      }
    }
  }

  std::vector<Edge> kept;
  kept.reserve(edges.size());
  std::size_t self_loops = 0;
  for (const Edge& edge : edges) {
    if (edge.follower >= n || edge.followee >= n) {
      std::ostringstream os;
      os << "edge [" << edge.follower << ", " << edge.followee << "] references a user >= n = "
         << n;
      throw ShapeError(os.str());
    }
    if (edge.follower == edge.followee) {
      ++self_loops;
      if (warnings) {
        warnings->push_back("dropped self-loop edge [" + std::to_string(edge.follower) + ", " +
                            std::to_string(edge.followee) + "]");
      }
      continue;
    }
    kept.push_back(edge);
  }
  std::sort(kept.begin(), kept.end());
  const auto last = std::unique(kept.begin(), kept.end());
  const auto duplicates = static_cast<std::size_t>(std::distance(last, kept.end()));
  kept.erase(last, kept.end());
  if (duplicates > 0 && warnings) {
    warnings->push_back("dropped " + std::to_string(duplicates) + " duplicate edge(s)");
  }

  Instance inst;
  inst.n_ = n;
  inst.T_ = T;
  inst.edges_ = std::move(kept);
  inst.p_ = std::move(p);
  inst.e_ = std::move(e);
  return inst;
}

Instance Instance::with_retweet(TypeUserMatrix p) const {
  return create(n_, T_, edges_, std::move(p), e_);
}

bool operator==(const Instance& a, const Instance& b) {
  if (a.n_ != b.n_ || a.T_ != b.T_ || a.edges_ != b.edges_ || a.p_ != b.p_) return false;
  if (a.e_.has_value() != b.e_.has_value()) return false;
  return !a.e_ || *a.e_ == *b.e_;
}

}  // namespace engdiv
