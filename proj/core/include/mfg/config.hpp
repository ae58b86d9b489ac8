#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mfg/diagnostics.hpp"
#include "mfg/fixedpoint.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Everything a run needs, decoded and validated from one config file.
struct RunSetup {
    MFGProblem problem;
    RegularizationConfig reg;  // epsilon set to the first schedule entry
    std::vector<double> schedule;
    FixedPointOpts solver;
    DiagnosticsOptions diagnostics;
    std::string output_directory = "out";
};

/// Flat `key = value` config with dotted keys.  Values are numbers,
/// booleans, bare or quoted strings (expressions), and numeric lists in
/// brackets.  Unknown keys are rejected so typos surface immediately.
class RunConfig {
  public:
    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_text(const std::string& text, const std::string& name = "<config>");

    RunSetup build() const;

    const std::string& raw_text() const { return raw_; }
    std::uint64_t content_hash() const;
    std::string content_hash_hex() const;

  private:
    struct Value {
        enum class Kind { number, boolean, string, list } kind = Kind::string;
        double num = 0.0;
        bool flag = false;
        std::string str;
        std::vector<double> list;
        int line = 0;
        mutable bool used = false;
    };

    std::map<std::string, Value> values_;
    std::string raw_;
    std::string name_;

    const Value* find(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    int integer_or(const std::string& key, int fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> list_or(const std::string& key, std::vector<double> fallback) const;
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;
};

}  // namespace mfg
