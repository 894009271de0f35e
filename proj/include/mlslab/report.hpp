#pragma once
// Experiment output: named assertions plus tabular data.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mlslab {

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

struct Assertion {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

struct Report {
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Assertion> assertions;
  std::map<std::string, Table> tables;  // written as <name>.csv
  nlohmann::json summary = nlohmann::json::object();

  void check(std::string name, bool pass, double value, double tolerance) {
    assertions.push_back({std::move(name), pass, value, tolerance});
  }
  bool passed() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
};

}  // namespace mlslab
