#include "perfectsim/alphabet.hpp"

#include <algorithm>
#include <set>

#include "perfectsim/kernel.hpp"

namespace perfectsim {

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw ConfigError("alphabet needs at least 2 letters");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw ConfigError("alphabet labels must be distinct");
}

Alphabet Alphabet::indexed(int size) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) labels.push_back(std::to_string(i));
  return Alphabet(std::move(labels));
}

std::optional<Letter> Alphabet::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<Letter>(i);
  return std::nullopt;
}

Word Word::most_recent_first(std::vector<Letter> letters) {
  Word w;
  w.letters_ = std::move(letters);
  return w;
}

Word Word::forward(std::vector<Letter> letters) {
  std::reverse(letters.begin(), letters.end());
  return most_recent_first(std::move(letters));
}

Word Word::prefix(int k) const {
  return most_recent_first({letters_.begin(), letters_.begin() + k});
}

Word Word::drop_recent() const {
  if (letters_.empty()) return {};
  return most_recent_first({letters_.begin() + 1, letters_.end()});
}

std::vector<Letter> Word::forward_letters() const {
  std::vector<Letter> fw(letters_.rbegin(), letters_.rend());
  return fw;
}

Tail Tail::periodic(std::vector<Letter> p) {
  if (p.empty()) throw ConfigError("periodic tail needs a nonempty pattern");
  return Tail{Kind::periodic, std::move(p)};
}

HistorySpec::HistorySpec(const Word& recent, Tail tail)
    : deepest_first_(recent.recent_first().rbegin(), recent.recent_first().rend()),
      tail_(std::move(tail)) {}

Word HistorySpec::prefix(int k) const {
  std::vector<Letter> letters;
  letters.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) letters.push_back(at_depth(j));
  return Word::most_recent_first(std::move(letters));
}

HistorySpec HistorySpec::prepend(Letter g) const {
  HistorySpec out = *this;
  out.deepest_first_.push_back(g);
  return out;
}

HistorySpec HistorySpec::truncated(int keep_recent) const {
  if (keep_recent >= explicit_depth()) return *this;
  HistorySpec out = *this;
  out.deepest_first_.erase(out.deepest_first_.begin(),
                           out.deepest_first_.end() - keep_recent);
  return out;
}

Letter letter_at(const HistorySpec& h, int j) { return h.at_depth(j); }

bool is_forbidden(const Word& w, const Kernel& kernel) {
  if (kernel.all_histories_admissible()) return false;
  // Unfolded recursion: the word is forbidden iff for some j the letter at
  // depth j vanishes uniformly over all extensions of the part deeper than j.
  const auto& letters = w.recent_first();
  const int n = w.length();
  for (int j = n - 1; j >= 0; --j) {
    Word deeper = Word::most_recent_first(
        {letters.begin() + j + 1, letters.end()});
    if (kernel.uniformly_null(letters[static_cast<std::size_t>(j)], deeper)) return true;
  }
  return false;
}

bool is_admissible_prefix(const Word& w, const Kernel& kernel) {
  if (kernel.all_histories_admissible()) return true;
  for (int j = 1; j <= w.length(); ++j)
    if (is_forbidden(w.prefix(j), kernel)) return false;
  return true;
}

bool is_admissible_history(const HistorySpec& h, const Kernel& kernel) {
  return kernel.history_admissible(h);
}

}  // namespace perfectsim
