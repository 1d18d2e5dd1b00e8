#include "bayescal/structured_text.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <system_error>

#include "bayescal/error.hpp"

namespace bayescal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '"' || c == '#' || c == '{' || c == '}' || c == '=' || c == '\\')
      return true;
  return false;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

// Strips a trailing comment that starts outside quotes.
std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_quotes = !in_quotes;
    if (c == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& s, const std::string& where) {
  if (s.size() < 2 || s.front() != '"') return s;
  if (s.back() != '"') throw ParseError(where + ": unterminated quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

}  // namespace

const std::string* TextBlock::get(const std::string& key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (it->first == key) return &it->second;
  return nullptr;
}

std::vector<std::string> TextBlock::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

TextBlock& TextBlock::add_child(std::string kind_, std::string label_) {
  children.push_back(TextBlock{std::move(kind_), std::move(label_), 0, {}, {}});
  return children.back();
}

TextBlock parse_structured_text(std::istream& in, const std::string& source) {
  TextBlock root;
  std::vector<TextBlock*> stack{&root};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line == "}") {
      if (stack.size() == 1) throw ParseError(where + ": unmatched '}'");
      stack.pop_back();
      continue;
    }
    if (line.back() == '{') {
      const std::string head = trim(line.substr(0, line.size() - 1));
      if (head.empty()) throw ParseError(where + ": block without a name");
      const auto space = head.find_first_of(" \t");
      std::string kind = head.substr(0, space);
      std::string label = space == std::string::npos ? std::string{} : unquote(trim(head.substr(space)), where);
      TextBlock& child = stack.back()->add_child(std::move(kind), std::move(label));
      child.line = line_no;
      stack.push_back(&child);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value', '{' or '}'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(where + ": missing key before '='");
    stack.back()->set(key, unquote(trim(line.substr(eq + 1)), where));
  }
  if (stack.size() != 1)
    throw ParseError(source + ": block '" + stack.back()->kind + "' opened on line " +
                     std::to_string(stack.back()->line) + " is never closed");
  return root;
}

namespace {

void write_block(std::ostream& out, const TextBlock& b, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& [k, v] : b.entries) out << pad << k << " = " << (needs_quotes(v) ? quote(v) : v) << '\n';
  for (const auto& c : b.children) {
    out << pad << c.kind;
    if (!c.label.empty()) out << ' ' << (needs_quotes(c.label) ? quote(c.label) : c.label);
    out << " {\n";
    write_block(out, c, depth + 1);
    out << pad << "}\n";
  }
}

}  // namespace

void write_structured_text(std::ostream& out, const TextBlock& root) { write_block(out, root, 0); }

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last && first != last;
}

}  // namespace bayescal
