#pragma once

#include <iosfwd>
#include <string>

#include "rhf/grammar.hpp"

namespace rhf {

// Textual grammar format: header directives followed by one rule per line.
//
//   # comment
//   states s1 s2 s3 s4 s5 s6
//   goals g0 g1 g2 g3 g4 g5 g6
//   terminal s0
//   recurrence 3          # k; omit the line for a constrained grammar
//   S -> s3 <META>
//   s3 <META> -> s3 g6 <ACT> s3
//   s6 <META> s3 -> s6 g5 <ACT> s6 s3
//   s3 g6 <ACT> -> s3 g6 s6 <META>
//   s6 g0 <ACT> -> s6 g0 s0
//
// parse(print(g)) reproduces g up to rule order.

class GrammarParseError : public DomainError {
 public:
  GrammarParseError(int line, const std::string& what)
      : DomainError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Grammar parse_grammar(std::istream& in);
Grammar parse_grammar_text(const std::string& text);
Grammar load_grammar_file(const std::string& path);

std::string print_grammar(const Grammar& grammar);
void save_grammar_file(const Grammar& grammar, const std::string& path);

}  // namespace rhf
