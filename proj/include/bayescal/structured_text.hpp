#pragma once

// Small nested key/value format shared by summaries and run configs:
//
//   # comment
//   key = value
//   kind "label" {
//     key = "quoted value"
//   }
//
// Keys may repeat; blocks nest arbitrarily.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bayescal {

struct TextBlock {
  std::string kind;
  std::string label;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<TextBlock> children;

  /// Last value stored under key, or nullptr.
  const std::string* get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
  void set(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
  TextBlock& add_child(std::string kind, std::string label = {});
};

/// Throws ParseError naming source and line.
TextBlock parse_structured_text(std::istream& in, const std::string& source);
void write_structured_text(std::ostream& out, const TextBlock& root);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Strict whole-string number parse; returns false on any trailing garbage.
bool parse_double(const std::string& text, double& out);

}  // namespace bayescal
