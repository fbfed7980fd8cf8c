#ifndef PERFECTSIM_ALPHABET_HPP
#define PERFECTSIM_ALPHABET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfectsim/errors.hpp"

namespace perfectsim {

using Letter = std::int32_t;

class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> labels);
  static Alphabet indexed(int size);  // labels "0","1",...

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(Letter g) const { return labels_.at(static_cast<std::size_t>(g)); }
  std::optional<Letter> find(std::string_view label) const;
  bool valid(Letter g) const { return g >= 0 && g < size(); }

 private:
  std::vector<std::string> labels_;
};

// Finite word over the alphabet, stored most-recent-first: index 0 holds
// w_{-1}.  at_depth(j) is w_{-j} (1-based), matching the history indexing.
class Word {
 public:
  Word() = default;
  static Word most_recent_first(std::vector<Letter> letters);
  static Word forward(std::vector<Letter> letters);  // oldest-first input

  int length() const { return static_cast<int>(letters_.size()); }
  bool empty() const { return letters_.empty(); }
  Letter at_depth(int j) const { return letters_.at(static_cast<std::size_t>(j - 1)); }
  Word prefix(int k) const;       // w_{-1},...,w_{-k}
  Word drop_recent() const;       // w_{-2},...  (the word without its newest letter)
  void extend_past(Letter g) { letters_.push_back(g); }

  std::vector<Letter> forward_letters() const;  // oldest first
  const std::vector<Letter>& recent_first() const { return letters_; }

  bool operator==(const Word&) const = default;
  bool operator<(const Word& o) const { return letters_ < o.letters_; }

 private:
  std::vector<Letter> letters_;
};

// Tail rule continuing a history past its explicit part.
struct Tail {
  enum class Kind { constant, periodic };
  Kind kind = Kind::constant;
  std::vector<Letter> pattern;  // constant: single letter; periodic: pattern[0] is the first tail position

  static Tail constant(Letter g) { return Tail{Kind::constant, {g}}; }
  static Tail periodic(std::vector<Letter> p);

  Letter at(int offset) const {  // offset >= 1 past the explicit part
    return pattern[static_cast<std::size_t>((offset - 1) % static_cast<int>(pattern.size()))];
  }
  int period() const { return static_cast<int>(pattern.size()); }
};

// An infinite past: explicit recent word plus a tail rule.  Letter lookup at
// any depth is O(1).  The explicit part is stored deepest-first internally so
// that push_recent is amortized O(1) during forward iteration.
class HistorySpec {
 public:
  HistorySpec(const Word& recent, Tail tail);
  static HistorySpec constant(Letter g) { return HistorySpec(Word(), Tail::constant(g)); }

  Letter at_depth(int j) const {  // w_{-j}, j >= 1
    const int d = explicit_depth();
    if (j <= d) return deepest_first_[static_cast<std::size_t>(d - j)];
    return tail_.at(j - d);
  }
  int explicit_depth() const { return static_cast<int>(deepest_first_.size()); }
  const Tail& tail() const { return tail_; }

  Word prefix(int k) const;
  HistorySpec prepend(Letter g) const;   // (g, *this)
  void push_recent(Letter g) { deepest_first_.push_back(g); }
  // Drop explicit letters deeper than keep_recent.  The tail keeps its
  // phase, so for periodic tails the junction letter changes.
  HistorySpec truncated(int keep_recent) const;

 private:
  std::vector<Letter> deepest_first_;
  Tail tail_;
};

class Kernel;  // kernel.hpp

// w_{-j} of a HistorySpec.
Letter letter_at(const HistorySpec& h, int j);

// Forbidden-word recursion evaluated to the word's own length: a word
// (s_0,...,s_{-n}) is forbidden iff its past part is forbidden or
// p(s_0 | .) vanishes uniformly over all extensions of the past part.
bool is_forbidden(const Word& w, const Kernel& kernel);

// w is in H_{|w|}: no suffix ending at the most recent position is forbidden.
bool is_admissible_prefix(const Word& w, const Kernel& kernel);

// Admissibility of a full HistorySpec, decided exactly for the bundled
// kernels (checks the explicit part plus one tail period junction).
bool is_admissible_history(const HistorySpec& h, const Kernel& kernel);

}  // namespace perfectsim

#endif
