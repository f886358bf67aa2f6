#include "omd/instance_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "omd/trace.hpp"

namespace omd {
namespace {

constexpr long long kMaxDimension = 1 << 20;

struct Token {
  std::string text;
  int line = 0;
};

/// Whitespace tokenizer that remembers the source line of every token and
/// strips '#' comments to end of line. All parse errors cite the stream
/// name and a line number.
class TokenStream {
 public:
  TokenStream(std::istream& in, std::string name) : name_(std::move(name)) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream words(line);
      std::string word;
      while (words >> word) tokens_.push_back(Token{word, number});
    }
    last_line_ = number;
  }

  bool done() const { return pos_ >= tokens_.size(); }

  Token take(const std::string& field) {
    if (done()) {
      throw ParseError(name_ + ": file ends while reading " + field +
                       " (last line " + std::to_string(last_line_) + ")");
    }
    return tokens_[pos_++];
  }

  [[noreturn]] void fail(const Token& token, const std::string& what) const {
    throw ParseError(name_ + " line " + std::to_string(token.line) + ": " +
                     what);
  }

  void expect_keyword(const std::string& word) {
    const Token token = take("keyword '" + word + "'");
    if (token.text != word) {
      fail(token, "expected '" + word + "', found '" + token.text + "'");
    }
  }

  void expect_int(const std::string& field, long long expected) {
    const Token token = take(field);
    errno = 0;
    char* end = nullptr;
    const long long value = std::strtoll(token.text.c_str(), &end, 10);
    if (end == token.text.c_str() || *end != '\0' || errno == ERANGE ||
        value != expected) {
      fail(token, "expected " + field + " " + std::to_string(expected) +
                      ", found '" + token.text + "'");
    }
  }

  long long take_dimension(const std::string& field) {
    const Token token = take(field);
    errno = 0;
    char* end = nullptr;
    const long long value = std::strtoll(token.text.c_str(), &end, 10);
    if (end == token.text.c_str() || *end != '\0' || errno == ERANGE) {
      fail(token,
           "expected an integer for " + field + ", found '" + token.text + "'");
    }
    if (value < 1 || value > kMaxDimension) {
      fail(token, field + " must be in [1, " + std::to_string(kMaxDimension) +
                      "], found " + token.text);
    }
    return value;
  }

  double take_real(const std::string& field) {
    const Token token = take(field);
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(token.text.c_str(), &end);
    if (end == token.text.c_str() || *end != '\0' || errno == ERANGE ||
        !std::isfinite(value)) {
      fail(token, "expected a finite number for " + field + ", found '" +
                      token.text + "'");
    }
    return value;
  }

  void expect_end() {
    if (!done()) {
      fail(tokens_[pos_],
           "unexpected trailing content '" + tokens_[pos_].text + "'");
    }
  }

 private:
  std::string name_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int last_line_ = 0;
};

Vecd read_reals(TokenStream& stream, Index count, const std::string& field) {
  Vecd out(count);
  for (Index i = 0; i < count; ++i) out[i] = stream.take_real(field);
  return out;
}

Matd read_matrix(TokenStream& stream, Index rows, Index cols,
                 const std::string& field) {
  Matd out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) out(r, c) = stream.take_real(field);
  }
  return out;
}

Instance parse_mdp(TokenStream& stream) {
  stream.expect_keyword("n_states");
  const Index n_states = static_cast<Index>(stream.take_dimension("n_states"));
  stream.expect_keyword("n_actions");
  const Index n_actions =
      static_cast<Index>(stream.take_dimension("n_actions"));
  stream.expect_keyword("theta");
  const double theta = stream.take_real("theta");
  stream.expect_keyword("rho0");
  const Vecd rho0 = read_reals(stream, n_states, "rho0");
  stream.expect_keyword("cost");
  const Matd cost = read_matrix(stream, n_states, n_actions, "cost");
  stream.expect_keyword("transition");
  const Matd transition =
      read_matrix(stream, n_states * n_actions, n_states, "transition");
  stream.expect_end();

  Instance instance;
  instance.kind = InstanceKind::mdp;
  instance.mdp.emplace(n_states, n_actions, transition, cost, theta,
                       ProbVector(rho0));
  return instance;
}

Instance parse_game(TokenStream& stream) {
  stream.expect_keyword("n_states");
  const Index n_states = static_cast<Index>(stream.take_dimension("n_states"));
  stream.expect_keyword("n_a");
  const Index n_a = static_cast<Index>(stream.take_dimension("n_a"));
  stream.expect_keyword("n_b");
  const Index n_b = static_cast<Index>(stream.take_dimension("n_b"));
  stream.expect_keyword("theta");
  const double theta = stream.take_real("theta");
  stream.expect_keyword("rho0");
  const Vecd rho0 = read_reals(stream, n_states, "rho0");
  stream.expect_keyword("cost");
  std::vector<Matd> cost;
  cost.reserve(static_cast<std::size_t>(n_states));
  for (Index s = 0; s < n_states; ++s) {
    cost.push_back(read_matrix(stream, n_a, n_b,
                               "cost for state " + std::to_string(s)));
  }
  stream.expect_keyword("transition");
  const Matd transition =
      read_matrix(stream, n_states * n_a * n_b, n_states, "transition");
  stream.expect_end();

  Instance instance;
  instance.kind = InstanceKind::game;
  instance.game.emplace(n_states, n_a, n_b, transition, std::move(cost), theta,
                        ProbVector(rho0));
  return instance;
}

Instance parse_finite_horizon(TokenStream& stream) {
  stream.expect_keyword("horizon");
  const int horizon = static_cast<int>(stream.take_dimension("horizon"));
  stream.expect_keyword("n_states");
  std::vector<Index> n_states;
  n_states.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    n_states.push_back(static_cast<Index>(
        stream.take_dimension("n_states at level " + std::to_string(h))));
  }
  stream.expect_keyword("n_actions");
  std::vector<Index> n_actions;
  n_actions.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    n_actions.push_back(static_cast<Index>(
        stream.take_dimension("n_actions at level " + std::to_string(h))));
  }
  stream.expect_keyword("rho1");
  const Vecd rho1 = read_reals(stream, n_states.front(), "rho1");
  std::vector<Matd> cost;
  cost.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    stream.expect_keyword("cost");
    stream.expect_int("cost level", h);
    cost.push_back(read_matrix(stream, n_states[static_cast<std::size_t>(h)],
                               n_actions[static_cast<std::size_t>(h)],
                               "cost at level " + std::to_string(h)));
  }
  std::vector<Matd> transition;
  transition.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h + 1 < horizon; ++h) {
    stream.expect_keyword("transition");
    stream.expect_int("transition level", h);
    transition.push_back(
        read_matrix(stream,
                    n_states[static_cast<std::size_t>(h)] *
                        n_actions[static_cast<std::size_t>(h)],
                    n_states[static_cast<std::size_t>(h) + 1],
                    "transition at level " + std::to_string(h)));
  }
  stream.expect_end();

  Instance instance;
  instance.kind = InstanceKind::finite_horizon;
  instance.finite_horizon.emplace(horizon, std::move(n_states),
                                  std::move(n_actions), std::move(transition),
                                  std::move(cost), ProbVector(rho1));
  return instance;
}

void write_row(std::ostream& out, const Vecd& row) {
  for (Index i = 0; i < row.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_double(row[i]);
  }
  out << '\n';
}

void write_matrix(std::ostream& out, const Matd& matrix) {
  for (Index r = 0; r < matrix.rows(); ++r) {
    write_row(out, matrix.row(r).transpose());
  }
}

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  return file;
}

}  // namespace

Instance parse_instance(std::istream& in, const std::string& name) {
  TokenStream stream(in, name);
  const Token kind = stream.take("instance kind");
  if (kind.text == "mdp") return parse_mdp(stream);
  if (kind.text == "game") return parse_game(stream);
  if (kind.text == "finite-horizon") return parse_finite_horizon(stream);
  stream.fail(kind, "unknown instance kind '" + kind.text +
                        "' (expected mdp, game, or finite-horizon)");
}

Instance load_instance(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw ParseError("cannot open '" + path + "'");
  }
  return parse_instance(file, path);
}

void save_instance(std::ostream& out, const TabularMDP& mdp) {
  out << "mdp\n";
  out << "n_states " << mdp.n_states << '\n';
  out << "n_actions " << mdp.n_actions << '\n';
  out << "theta " << format_double(mdp.discount) << '\n';
  out << "rho0\n";
  write_row(out, mdp.rho0.weights());
  out << "cost\n";
  write_matrix(out, mdp.cost);
  out << "transition\n";
  write_matrix(out, mdp.transition);
}

void save_instance(std::ostream& out, const ZeroSumMarkovGame& game) {
  out << "game\n";
  out << "n_states " << game.n_states << '\n';
  out << "n_a " << game.n_a << '\n';
  out << "n_b " << game.n_b << '\n';
  out << "theta " << format_double(game.discount) << '\n';
  out << "rho0\n";
  write_row(out, game.rho0.weights());
  out << "cost\n";
  for (const Matd& block : game.cost) write_matrix(out, block);
  out << "transition\n";
  write_matrix(out, game.transition);
}

void save_instance(std::ostream& out, const FiniteHorizonMDP& fh) {
  out << "finite-horizon\n";
  out << "horizon " << fh.horizon << '\n';
  out << "n_states";
  for (const Index n : fh.n_states) out << ' ' << n;
  out << '\n';
  out << "n_actions";
  for (const Index n : fh.n_actions) out << ' ' << n;
  out << '\n';
  out << "rho1\n";
  write_row(out, fh.rho1.weights());
  for (int h = 0; h < fh.horizon; ++h) {
    out << "cost " << h << '\n';
    write_matrix(out, fh.cost[static_cast<std::size_t>(h)]);
  }
  for (int h = 0; h + 1 < fh.horizon; ++h) {
    out << "transition " << h << '\n';
    write_matrix(out, fh.transition[static_cast<std::size_t>(h)]);
  }
}

void save_instance_file(const std::string& path, const TabularMDP& mdp) {
  std::ofstream file = open_for_writing(path);
  save_instance(file, mdp);
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

void save_instance_file(const std::string& path,
                        const ZeroSumMarkovGame& game) {
  std::ofstream file = open_for_writing(path);
  save_instance(file, game);
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

void save_instance_file(const std::string& path, const FiniteHorizonMDP& fh) {
  std::ofstream file = open_for_writing(path);
  save_instance(file, fh);
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace omd
