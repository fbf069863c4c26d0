#pragma once

// Synthetic corpora and matrices shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "trolldetect/corpus.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/random.hpp"
#include "trolldetect/som.hpp"
#include "trolldetect/text.hpp"

namespace trolldetect::support {

/// Matrix with generated user ids u0, u1, ...
inline features::FeatureMatrix make_matrix(std::size_t rows, std::size_t cols,
                                           std::vector<double> values) {
  std::vector<std::string> ids, names;
  for (std::size_t r = 0; r < rows; ++r) ids.push_back("u" + std::to_string(r));
  for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
  return features::FeatureMatrix(std::move(ids), std::move(names), std::move(values));
}

inline features::FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                                             double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return make_matrix(rows, cols, std::move(v));
}

inline som::SomGrid random_grid(std::size_t w, std::size_t h, std::size_t dim, Rng& rng) {
  std::vector<double> v(w * h * dim);
  for (auto& x : v) x = rng.uniform();
  return som::SomGrid(w, h, dim, std::move(v));
}

/// Russian letter weights (approximate corpus frequencies). "э" is absent
/// so that its frequency column is constant in generated corpora.
struct Letter {
  char32_t cp;
  double weight;
};

inline const std::vector<Letter>& russian_letters() {
  static const std::vector<Letter> letters{
      {U'о', 11.0}, {U'е', 8.5}, {U'а', 8.0}, {U'и', 7.4}, {U'н', 6.7}, {U'т', 6.3},
      {U'с', 5.5},  {U'р', 4.7}, {U'в', 4.5}, {U'л', 4.4}, {U'к', 3.5}, {U'м', 3.2},
      {U'д', 3.0},  {U'п', 2.8}, {U'у', 2.6}, {U'я', 2.0}, {U'ы', 1.9}, {U'ь', 1.7},
      {U'г', 1.7},  {U'з', 1.6}, {U'б', 1.6}, {U'ч', 1.5}, {U'й', 1.2}, {U'х', 1.0},
      {U'ж', 0.9},  {U'ш', 0.7}, {U'ю', 0.6}, {U'ц', 0.5}, {U'щ', 0.4}, {U'ф', 0.3},
  };
  return letters;
}

/// Per-user character model: perturbed letter weights plus punctuation rates.
struct WriterProfile {
  std::vector<double> cumulative;  // over russian_letters()
  double space = 0.15;
  double exclaim = 0.0;
  double question = 0.0;
};

/// `jitter` is the log-scale spread of the per-writer letter preferences.
inline WriterProfile make_profile(Rng& rng, double exclaim, double question,
                                  double jitter = 0.1) {
  WriterProfile p;
  double acc = 0.0;
  for (const auto& l : russian_letters()) {
    acc += l.weight * std::exp(jitter * rng.normal());
    p.cumulative.push_back(acc);
  }
  p.space = rng.uniform(0.12, 0.18);
  p.exclaim = exclaim;
  p.question = question;
  return p;
}

inline std::string write_message(const WriterProfile& p, std::size_t length, Rng& rng) {
  const auto& letters = russian_letters();
  std::u32string s;
  for (std::size_t i = 0; i < length; ++i) {
    const double u = rng.uniform();
    if (u < p.exclaim) {
      s.push_back(U'!');
    } else if (u < p.exclaim + p.question) {
      s.push_back(U'?');
    } else if (u < p.exclaim + p.question + p.space && i > 0 && s.back() != U' ') {
      s.push_back(U' ');
    } else {
      const double t = rng.uniform() * p.cumulative.back();
      const auto it = std::upper_bound(p.cumulative.begin(), p.cumulative.end(), t);
      const auto idx = std::min<std::size_t>(it - p.cumulative.begin(), letters.size() - 1);
      s.push_back(letters[idx].cp);
    }
  }
  std::string out;
  for (char32_t cp : s) out += text::to_utf8(cp);
  return out;
}

struct TrollCorpus {
  std::vector<corpus::Comment> comments;  // interleaved
  std::set<std::string> trolls;
  std::size_t users = 0;
};

struct TrollCorpusParams {
  std::size_t normal_users = 141;
  std::size_t troll_users = 4;
  // Share of normal users that use "!" / "?" at all, and their rate ceilings.
  double normal_exclaim_share = 0.15;
  double normal_exclaim_max = 0.006;
  double normal_question_share = 0.1;
  double normal_question_max = 0.004;
  // Troll punctuation rates are drawn uniformly from these ranges.
  double troll_exclaim_lo = 0.015, troll_exclaim_hi = 0.03;
  double troll_question_lo = 0.004, troll_question_hi = 0.033;
  // Mean message length ranges.
  double normal_length_lo = 20.0, normal_length_hi = 250.0;
  double letter_jitter = 0.1;
  double troll_length_lo = 150.0, troll_length_hi = 250.0;
  // P(M = m) for normal users is proportional to decay^(m - 1), m in 1..7.
  double normal_message_decay = 0.35;
};

inline std::size_t normal_message_count(Rng& rng, const TrollCorpusParams& p) {
  double total = 0.0;
  for (int m = 0; m < 7; ++m) total += std::pow(p.normal_message_decay, m);
  double u = rng.uniform() * total;
  for (std::size_t m = 1; m < 7; ++m) {
    u -= std::pow(p.normal_message_decay, static_cast<double>(m - 1));
    if (u < 0.0) return m;
  }
  return 7;
}

/// Normal participants write 1-7 short messages with few "!"/"?"; trolls
/// write 25-40 long messages with frequent "!" and "?".
inline TrollCorpus make_troll_corpus(std::uint64_t seed, const TrollCorpusParams& p = {}) {
  Rng rng(seed);
  TrollCorpus out;
  out.users = p.normal_users + p.troll_users;

  // Random, collision-free ids so trolls do not sort together.
  std::vector<std::size_t> ids(out.users);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  rng.shuffle(std::span<std::size_t>(ids));

  std::vector<corpus::Comment> all;
  for (std::size_t u = 0; u < out.users; ++u) {
    const bool troll = u >= p.normal_users;
    char name[16];
    std::snprintf(name, sizeof name, "user%03zu", ids[u]);
    if (troll) out.trolls.insert(name);

    WriterProfile profile;
    if (troll) {
      const double exclaim = rng.uniform(p.troll_exclaim_lo, p.troll_exclaim_hi);
      const double question = rng.uniform(p.troll_question_lo, p.troll_question_hi);
      profile = make_profile(rng, exclaim, question, p.letter_jitter);
    } else {
      const double exclaim =
          rng.uniform() < p.normal_exclaim_share ? rng.uniform(0.0, p.normal_exclaim_max) : 0.0;
      const double question =
          rng.uniform() < p.normal_question_share ? rng.uniform(0.0, p.normal_question_max) : 0.0;
      profile = make_profile(rng, exclaim, question, p.letter_jitter);
    }
    const std::size_t messages = troll ? 25 + rng.below(16) : normal_message_count(rng, p);
    const double base = troll ? rng.uniform(p.troll_length_lo, p.troll_length_hi)
                              : rng.uniform(p.normal_length_lo, p.normal_length_hi);
    for (std::size_t m = 0; m < messages; ++m) {
      const auto len = static_cast<std::size_t>(std::max(3.0, base * rng.uniform(0.6, 1.4)));
      all.push_back({name, write_message(profile, len, rng)});
    }
  }
  rng.shuffle(std::span<corpus::Comment>(all));
  out.comments = std::move(all);
  return out;
}

}  // namespace trolldetect::support
