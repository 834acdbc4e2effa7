#include "rhf/grammar_text.hpp"

#include <fstream>
#include <sstream>

namespace rhf {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) {
    if (t[0] == '#') break;  // comment to end of line
    toks.push_back(t);
  }
  return toks;
}

struct Header {
  std::vector<std::string> states;
  std::vector<std::string> goals;
  std::string terminal;
  bool has_states = false, has_goals = false, has_terminal = false;
  bool has_recurrence = false;
  int recurrence = 0;
};

}  // namespace

Grammar parse_grammar(std::istream& in) {
  Header hdr;
  Grammar g;
  bool symbols_built = false;
  std::string line;
  int lineno = 0;

  auto build_symbols = [&](int at_line) {
    if (symbols_built) return;
    if (!hdr.has_states || !hdr.has_goals || !hdr.has_terminal)
      throw GrammarParseError(at_line,
                              "rules before complete header (need states, goals, terminal)");
    g.symbols = SymbolTable(hdr.states, hdr.goals, hdr.terminal);
    g.kind = hdr.has_recurrence ? GrammarKind::Recurrent : GrammarKind::Constrained;
    g.recurrence = hdr.recurrence;
    symbols_built = true;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;

    const std::string& head = toks[0];
    if (head == "states" || head == "goals" || head == "terminal" || head == "recurrence") {
      if (symbols_built)
        throw GrammarParseError(lineno, "header directive '" + head + "' after rules");
      if (head == "states") {
        if (hdr.has_states) throw GrammarParseError(lineno, "duplicate 'states' directive");
        if (toks.size() < 2) throw GrammarParseError(lineno, "'states' needs at least one symbol");
        hdr.states.assign(toks.begin() + 1, toks.end());
        hdr.has_states = true;
      } else if (head == "goals") {
        if (hdr.has_goals) throw GrammarParseError(lineno, "duplicate 'goals' directive");
        if (toks.size() < 2) throw GrammarParseError(lineno, "'goals' needs at least one symbol");
        hdr.goals.assign(toks.begin() + 1, toks.end());
        hdr.has_goals = true;
      } else if (head == "terminal") {
        if (hdr.has_terminal) throw GrammarParseError(lineno, "duplicate 'terminal' directive");
        if (toks.size() != 2) throw GrammarParseError(lineno, "'terminal' needs exactly one symbol");
        hdr.terminal = toks[1];
        hdr.has_terminal = true;
      } else {
        if (hdr.has_recurrence) throw GrammarParseError(lineno, "duplicate 'recurrence' directive");
        if (toks.size() != 2) throw GrammarParseError(lineno, "'recurrence' needs one integer");
        try {
          hdr.recurrence = std::stoi(toks[1]);
        } catch (const std::exception&) {
          throw GrammarParseError(lineno, "'recurrence' value is not an integer");
        }
        if (hdr.recurrence < 0) throw GrammarParseError(lineno, "'recurrence' must be >= 0");
        hdr.has_recurrence = true;
      }
      continue;
    }

    // Rule line.
    try {
      build_symbols(lineno);
    } catch (const GrammarParseError&) {
      throw;
    }
    auto arrow = std::find(toks.begin(), toks.end(), "->");
    if (arrow == toks.end()) throw GrammarParseError(lineno, "rule has no '->'");
    std::vector<std::string> lhs(toks.begin(), arrow);
    std::vector<std::string> rhs(arrow + 1, toks.end());
    if (lhs.empty() || rhs.empty()) throw GrammarParseError(lineno, "rule side is empty");

    try {
      if (lhs.size() == 1 && lhs[0] == "S") {
        // S -> s <META>
        if (rhs.size() != 2 || rhs[1] != "<META>")
          throw DomainError("start rule right side must be 's <META>'");
        g.start_rules.push_back({g.symbols.require_state(rhs[0])});
      } else if (lhs.size() >= 2 && lhs[1] == "<META>") {
        // s <META> s~ -> s g <ACT> s s~
        int state = g.symbols.require_state(lhs[0]);
        std::vector<int> context;
        for (size_t i = 2; i < lhs.size(); ++i)
          context.push_back(g.symbols.require_state(lhs[i]));
        if (rhs.size() != 4 + context.size())
          throw DomainError("META rule right side has the wrong length");
        if (rhs[0] != lhs[0] || rhs[2] != "<ACT>" || rhs[3] != lhs[0])
          throw DomainError("META rule right side must repeat 's g <ACT> s'");
        for (size_t i = 0; i < context.size(); ++i)
          if (rhs[4 + i] != lhs[2 + i]) throw DomainError("META rule context not preserved");
        int goal = g.symbols.require_goal(rhs[1]);
        g.meta_rules.push_back({state, std::move(context), goal});
      } else if (lhs.size() == 3 && lhs[2] == "<ACT>") {
        int state = g.symbols.require_state(lhs[0]);
        int goal = g.symbols.require_goal(lhs[1]);
        if (rhs.size() < 3 || rhs[0] != lhs[0] || rhs[1] != lhs[1])
          throw DomainError("ACT rule right side must start with 's g'");
        if (rhs.size() == 3 && rhs[2] == "<ACT>") {
          g.act_rules.push_back({state, goal, ActKind::Loop});
        } else if (rhs.size() == 3 && g.symbols.is_terminal_symbol(rhs[2])) {
          g.act_rules.push_back({state, goal, ActKind::Terminate});
        } else if (rhs.size() == 4 && rhs[3] == "<META>") {
          int next = g.symbols.require_state(rhs[2]);
          g.act_rules.push_back({state, goal, ActKind::Return, next});
        } else {
          throw DomainError("ACT rule right side must end with '<ACT>', the terminal symbol, "
                            "or \"s' <META>\"");
        }
      } else {
        throw DomainError("unrecognized rule shape");
      }
    } catch (const DomainError& e) {
      throw GrammarParseError(lineno, e.what());
    }
  }

  if (!symbols_built) build_symbols(lineno);
  return g;
}

Grammar parse_grammar_text(const std::string& text) {
  std::istringstream in(text);
  return parse_grammar(in);
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open grammar file '" + path + "'");
  return parse_grammar(in);
}

std::string print_grammar(const Grammar& grammar) {
  Grammar g = grammar;
  g.canonicalize();
  const SymbolTable& sym = g.symbols;
  std::ostringstream out;

  out << "states";
  for (const auto& s : sym.states()) out << ' ' << s;
  out << "\ngoals";
  for (const auto& s : sym.goals()) out << ' ' << s;
  out << "\nterminal " << sym.terminal_name() << '\n';
  if (g.kind == GrammarKind::Recurrent) out << "recurrence " << g.recurrence << '\n';

  for (const auto& r : g.start_rules)
    out << "S -> " << sym.state_name(r.state) << " <META>\n";
  for (const auto& r : g.meta_rules) {
    std::string ctx;
    for (int c : r.context) ctx += ' ' + sym.state_name(c);
    const std::string& s = sym.state_name(r.state);
    out << s << " <META>" << ctx << " -> " << s << ' ' << sym.goal_name(r.goal) << " <ACT> " << s
        << ctx << '\n';
  }
  for (const auto& r : g.act_rules) {
    const std::string& s = sym.state_name(r.state);
    const std::string& gl = sym.goal_name(r.goal);
    out << s << ' ' << gl << " <ACT> -> " << s << ' ' << gl << ' ';
    switch (r.kind) {
      case ActKind::Return:
        out << sym.state_name(r.next_state) << " <META>";
        break;
      case ActKind::Terminate:
        out << sym.terminal_name();
        break;
      case ActKind::Loop:
        out << "<ACT>";
        break;
    }
    out << '\n';
  }
  return out.str();
}

void save_grammar_file(const Grammar& grammar, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write grammar file '" + path + "'");
  out << print_grammar(grammar);
}

}  // namespace rhf
