#pragma once

/**
 * @file selftest.hpp
 * @brief Built-in invariant and oracle checks, runnable from the CLI.
 *
 * The list of checks is fixed at compile time. Hooks replace individual
 * library routines so a test can plant a fault and confirm that the
 * matching check, and only that one, reports it.
 */

#include "npcac/basis.hpp"
#include "npcac/ident.hpp"
#include "npcac/qp.hpp"

#include <functional>
#include <string>
#include <vector>

namespace npcac {

struct SelftestHooks {
  std::function<Eigen::VectorXd(const BasisSpec&, double)> basis_eval = [](const BasisSpec& s, double x) {
    return eval(s, x);
  };
  std::function<ForgetResult(const Eigen::MatrixXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&, double)> forget =
      directional_forget;
  std::function<QpSolution(const QpProblem&)> qp_solver = [](const QpProblem& p) { return solve_qp(p); };
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst observed deviation or the exception text
};

const std::vector<std::string>& selftest_names();

std::vector<CheckResult> run_selftest(const SelftestHooks& hooks = {});

}  // namespace npcac
