#pragma once

#include <iosfwd>
#include <string>

#include "mtrl/envs.hpp"
#include "mtrl/estimation.hpp"
#include "mtrl/mdp.hpp"

namespace mtrl {

// Structured text formats. Lines starting with '#' and blank lines are
// ignored. All indices are 0-based and doubles round-trip exactly.
//
//   mdp <S> <A> <gamma>
//   <s> <a> <s'> <prob>      one line per nonzero transition
//   <s> <a> <reward_mean>    one line per (s, a)
//
//   counts <S> <A>
//   <s> <a> <s'> <count>     one line per nonzero count
//   <s> <a> <reward_sum>     one line per (s, a) with visits
//
//   family <C> <S> <A> <gamma> <start>
//   prior <p_1> ... <p_C>
//   gap <g>   diameter <d>   next_states <n>
//   followed by C mdp blocks
void save_mdp(std::ostream& out, const Mdp& mdp);
Mdp load_mdp(std::istream& in);

void save_counts(std::ostream& out, const CountTable& counts);
CountTable load_counts(std::istream& in);

void save_family(std::ostream& out, const MdpFamily& family);
MdpFamily load_family(std::istream& in);

void save_mdp_file(const std::string& path, const Mdp& mdp);
Mdp load_mdp_file(const std::string& path);
void save_counts_file(const std::string& path, const CountTable& counts);
CountTable load_counts_file(const std::string& path);
void save_family_file(const std::string& path, const MdpFamily& family);
MdpFamily load_family_file(const std::string& path);

// FNV-1a 64 over a byte string; used for golden-fixture checks.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace mtrl
