#pragma once

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>

namespace acceptance {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Prints "PASS|FAIL  <id>  <name>: <detail>" lines and tallies them.
class Report {
 public:
  void line(const std::string& id, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("%s  %-3s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    ++(pass ? passed_ : failed_);
  }

  // Runs one criterion; an escaping exception fails it.
  template <typename F>
  void guard(const std::string& id, F run) {
    try {
      run(*this);
    } catch (const std::exception& e) {
      line(id, "criterion aborted", false, e.what());
    }
  }

  int finish() const {
    std::printf("%d passed, %d failed\n", passed_, failed_);
    return failed_ == 0 ? 0 : 1;
  }

  static std::string pct(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f%%", 100.0 * x);
    return b;
  }
  static std::string secs(double s) {
    char b[32];
    std::snprintf(b, sizeof b, "%.1f s", s);
    return b;
  }

 private:
  int passed_ = 0;
  int failed_ = 0;
};

}  // namespace acceptance
