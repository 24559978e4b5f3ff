#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netdesign {

/// Malformed input (TNTP file, instance JSON, CLI config). `line` is 1-based
/// and 0 when the error is not tied to a particular line.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " +
                                           message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Some origin-destination pair with positive demand cannot be routed in the
/// subgraph under consideration. Node ids are 1-based (as in the input
/// files); `scenario` is -1 for deterministic problems. `reachable` lists the
/// 1-based nodes reachable from the origin, as a certificate.
class RoutingInfeasible : public std::runtime_error {
 public:
  RoutingInfeasible(int origin, int destination, int scenario,
                    std::vector<int> reachable)
      : std::runtime_error(describe(origin, destination, scenario)),
        origin_(origin),
        destination_(destination),
        scenario_(scenario),
        reachable_(std::move(reachable)) {}

  int origin() const { return origin_; }
  int destination() const { return destination_; }
  int scenario() const { return scenario_; }
  const std::vector<int>& reachable() const { return reachable_; }

 private:
  static std::string describe(int origin, int destination, int scenario) {
    std::string s = "no route from node " + std::to_string(origin) +
                    " to node " + std::to_string(destination);
    if (scenario >= 0) s += " in scenario " + std::to_string(scenario);
    return s;
  }

  int origin_;
  int destination_;
  int scenario_;
  std::vector<int> reachable_;
};

}  // namespace netdesign
