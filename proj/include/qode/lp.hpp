#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qode/system.hpp"

namespace qode::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

struct Solution {
  Status status = Status::IterLimit;
  Vec x;                      // primal point (valid for Optimal)
  double objective = 0.0;
  Vec ray;                    // recession direction (valid for Unbounded)
  int iterations = 0;
  int most_violated_row = -1; // for Infeasible
};

/// Dense LP in the form  min c'x  s.t.  A x <= b,  x >= 0.
/// Free variables are modeled upstream by splitting into two columns.
struct Problem {
  int num_vars = 0;
  Vec c;
  double c0 = 0.0;  // constant objective offset, reported in `objective`
  std::vector<Vec> rows;
  std::vector<double> rhs;
  std::vector<std::string> var_names;  // optional, for LP-format export
  std::vector<std::string> row_names;

  void add_row(Vec a, double b) {
    rows.push_back(std::move(a));
    rhs.push_back(b);
  }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

struct SolveOptions {
  int max_iterations = 200000;
  double pivot_eps = 1e-9;
  double feas_eps = 1e-9;
};

Solution solve(const Problem& prob, const SolveOptions& opts = {});

/// CPLEX LP text format, for external cross-checks.
void write_lp_format(const Problem& prob, std::ostream& os);

}  // namespace qode::lp
