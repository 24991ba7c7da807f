#pragma once

#include <string>
#include <vector>

namespace clg::golden {

struct Case {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Replays the worked examples shipped under data_dir and compares with the
// published numbers.
std::vector<Case> run(const std::string& data_dir);

}  // namespace clg::golden
