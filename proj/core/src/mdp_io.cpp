#include "mtrl/mdp_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mtrl {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Next content line split into whitespace tokens; skips comments and blanks.
bool next_tokens(std::istream& in, std::vector<std::string>& tokens) {
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    tokens.clear();
    std::istringstream row(line);
    std::string tok;
    while (row >> tok) tokens.push_back(tok);
    if (!tokens.empty()) return true;
  }
  return false;
}

double parse_double(const std::string& tok) {
  std::size_t used = 0;
  const double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::invalid_argument("malformed number '" + tok + "'");
  return v;
}

std::int64_t parse_int(const std::string& tok) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw std::invalid_argument("malformed integer '" + tok + "'");
  return v;
}

}  // namespace

void save_mdp(std::ostream& out, const Mdp& mdp) {
  out << "mdp " << mdp.num_states() << ' ' << mdp.num_actions() << ' '
      << format_double(mdp.discount()) << '\n';
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a)
      for (int next = 0; next < mdp.num_states(); ++next)
        if (mdp.transition(s, a, next) > 0.0)
          out << s << ' ' << a << ' ' << next << ' '
              << format_double(mdp.transition(s, a, next)) << '\n';
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a)
      out << s << ' ' << a << ' ' << format_double(mdp.reward_mean(s, a)) << '\n';
}

Mdp load_mdp(std::istream& in) {
  std::vector<std::string> tokens;
  if (!next_tokens(in, tokens) || tokens.size() != 4 || tokens[0] != "mdp")
    throw std::invalid_argument("load_mdp: expected header 'mdp S A gamma'");
  const int S = static_cast<int>(parse_int(tokens[1]));
  const int A = static_cast<int>(parse_int(tokens[2]));
  const double gamma = parse_double(tokens[3]);
  if (S <= 0 || A <= 0) throw std::invalid_argument("load_mdp: bad dimensions");

  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<char> reward_seen(static_cast<std::size_t>(S) * A, 0);
  std::size_t rewards_read = 0;
  while (rewards_read < reward.size()) {
    if (!next_tokens(in, tokens))
      throw std::invalid_argument("load_mdp: truncated file");
    if (tokens.size() == 4) {
      const int s = static_cast<int>(parse_int(tokens[0]));
      const int a = static_cast<int>(parse_int(tokens[1]));
      const int next = static_cast<int>(parse_int(tokens[2]));
      if (s < 0 || s >= S || a < 0 || a >= A || next < 0 || next >= S)
        throw std::invalid_argument("load_mdp: transition indices out of range");
      transition[(static_cast<std::size_t>(s) * A + a) * S + next] = parse_double(tokens[3]);
    } else if (tokens.size() == 3) {
      const int s = static_cast<int>(parse_int(tokens[0]));
      const int a = static_cast<int>(parse_int(tokens[1]));
      if (s < 0 || s >= S || a < 0 || a >= A)
        throw std::invalid_argument("load_mdp: reward indices out of range");
      const std::size_t idx = static_cast<std::size_t>(s) * A + a;
      if (reward_seen[idx]) throw std::invalid_argument("load_mdp: duplicate reward row");
      reward_seen[idx] = 1;
      reward[idx] = parse_double(tokens[2]);
      ++rewards_read;
    } else {
      throw std::invalid_argument("load_mdp: rows must have 3 or 4 fields");
    }
  }
  return Mdp(S, A, std::move(transition), std::move(reward), gamma);
}

void save_counts(std::ostream& out, const CountTable& counts) {
  out << "counts " << counts.num_states() << ' ' << counts.num_actions() << '\n';
  for (int s = 0; s < counts.num_states(); ++s)
    for (int a = 0; a < counts.num_actions(); ++a)
      for (int next = 0; next < counts.num_states(); ++next)
        if (counts.next_count(s, a, next) > 0)
          out << s << ' ' << a << ' ' << next << ' ' << counts.next_count(s, a, next) << '\n';
  for (int s = 0; s < counts.num_states(); ++s)
    for (int a = 0; a < counts.num_actions(); ++a)
      if (counts.visits(s, a) > 0)
        out << s << ' ' << a << ' ' << format_double(counts.reward_sum(s, a)) << '\n';
}

CountTable load_counts(std::istream& in) {
  std::vector<std::string> tokens;
  if (!next_tokens(in, tokens) || tokens.size() != 3 || tokens[0] != "counts")
    throw std::invalid_argument("load_counts: expected header 'counts S A'");
  const int S = static_cast<int>(parse_int(tokens[1]));
  const int A = static_cast<int>(parse_int(tokens[2]));
  CountTable counts(S, A);
  while (next_tokens(in, tokens)) {
    if (tokens.size() == 4) {
      counts.add_observation(static_cast<int>(parse_int(tokens[0])),
                             static_cast<int>(parse_int(tokens[1])),
                             static_cast<int>(parse_int(tokens[2])), parse_int(tokens[3]),
                             0.0);
    } else if (tokens.size() == 3) {
      counts.add_observation(static_cast<int>(parse_int(tokens[0])),
                             static_cast<int>(parse_int(tokens[1])), 0, 0,
                             parse_double(tokens[2]));
    } else {
      throw std::invalid_argument("load_counts: rows must have 3 or 4 fields");
    }
  }
  return counts;
}

void save_family(std::ostream& out, const MdpFamily& family) {
  family.validate();
  out << "family " << family.size() << ' ' << family.members.front().num_states() << ' '
      << family.members.front().num_actions() << ' '
      << format_double(family.members.front().discount()) << ' ' << family.start_state
      << '\n';
  out << "prior";
  for (const double p : family.prior) out << ' ' << format_double(p);
  out << '\n';
  out << "gap " << format_double(family.gap) << '\n';
  out << "diameter " << format_double(family.diameter_bound) << '\n';
  out << "next_states " << family.next_state_bound << '\n';
  for (const auto& m : family.members) save_mdp(out, m);
}

MdpFamily load_family(std::istream& in) {
  std::vector<std::string> tokens;
  if (!next_tokens(in, tokens) || tokens.size() != 6 || tokens[0] != "family")
    throw std::invalid_argument("load_family: expected header 'family C S A gamma start'");
  const int C = static_cast<int>(parse_int(tokens[1]));
  MdpFamily family;
  family.start_state = static_cast<int>(parse_int(tokens[5]));

  if (!next_tokens(in, tokens) || tokens.size() != static_cast<std::size_t>(C) + 1 ||
      tokens[0] != "prior")
    throw std::invalid_argument("load_family: expected prior row");
  for (int c = 0; c < C; ++c) family.prior.push_back(parse_double(tokens[c + 1]));

  if (!next_tokens(in, tokens) || tokens.size() != 2 || tokens[0] != "gap")
    throw std::invalid_argument("load_family: expected gap row");
  family.gap = parse_double(tokens[1]);
  if (!next_tokens(in, tokens) || tokens.size() != 2 || tokens[0] != "diameter")
    throw std::invalid_argument("load_family: expected diameter row");
  family.diameter_bound = parse_double(tokens[1]);
  if (!next_tokens(in, tokens) || tokens.size() != 2 || tokens[0] != "next_states")
    throw std::invalid_argument("load_family: expected next_states row");
  family.next_state_bound = static_cast<int>(parse_int(tokens[1]));

  for (int c = 0; c < C; ++c) family.members.push_back(load_mdp(in));
  family.validate();
  return family;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

void save_mdp_file(const std::string& path, const Mdp& mdp) {
  auto out = open_out(path);
  save_mdp(out, mdp);
}

Mdp load_mdp_file(const std::string& path) {
  auto in = open_in(path);
  return load_mdp(in);
}

void save_counts_file(const std::string& path, const CountTable& counts) {
  auto out = open_out(path);
  save_counts(out, counts);
}

CountTable load_counts_file(const std::string& path) {
  auto in = open_in(path);
  return load_counts(in);
}

void save_family_file(const std::string& path, const MdpFamily& family) {
  auto out = open_out(path);
  save_family(out, family);
}

MdpFamily load_family_file(const std::string& path) {
  auto in = open_in(path);
  return load_family(in);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace mtrl
