#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "omd/markov_game.hpp"
#include "omd/mdp.hpp"

namespace omd {

/// Malformed instance text: the message names the file, the 1-based line,
/// and the field being read.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class InstanceKind { mdp, game, finite_horizon };

/// One loaded problem instance; exactly the member matching `kind` is set.
struct Instance {
  InstanceKind kind = InstanceKind::mdp;
  std::optional<TabularMDP> mdp;
  std::optional<ZeroSumMarkovGame> game;
  std::optional<FiniteHorizonMDP> finite_horizon;
};

/// Parses the structured-text instance format: a kind tag, dimensions,
/// then dense arrays in row-major order. `name` labels parse errors.
Instance parse_instance(std::istream& in, const std::string& name);

Instance load_instance(const std::string& path);

void save_instance(std::ostream& out, const TabularMDP& mdp);
void save_instance(std::ostream& out, const ZeroSumMarkovGame& game);
void save_instance(std::ostream& out, const FiniteHorizonMDP& fh);

void save_instance_file(const std::string& path, const TabularMDP& mdp);
void save_instance_file(const std::string& path,
                        const ZeroSumMarkovGame& game);
void save_instance_file(const std::string& path, const FiniteHorizonMDP& fh);

}  // namespace omd
