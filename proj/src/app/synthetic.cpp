#include "r3/app/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <stdexcept>

namespace r3::app {

namespace {

const std::vector<std::string> kFunctionWords = {"who", "is", "the", "of", "saw", "near", "met", "in", "?", "."};

const std::vector<std::string> kRelations = {"capital", "mayor", "founder", "river",  "leader", "coach",
                                             "author",  "king",  "owner",   "rival",  "bishop", "judge",
                                             "doctor",  "poet",  "sheriff", "banker"};

std::vector<std::string> make_names(std::size_t count, const std::vector<std::string>& endings) {
  static const std::string consonants = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::vector<std::string> out;
  for (std::size_t i = 0; out.size() < count; ++i) {
    const std::size_t stems = consonants.size() * vowels.size();
    if (i >= stems * endings.size()) throw std::invalid_argument("synthetic task: vocabulary too large");
    std::string name;
    name += consonants[i % consonants.size()];
    name += vowels[(i / consonants.size()) % vowels.size()];
    name += endings[i / stems];
    out.push_back(name);
  }
  return out;
}

std::string sentence(std::vector<std::string> words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (relations == 0 || relations > kRelations.size()) {
    throw std::invalid_argument("synthetic task: relations must lie in [1, " + std::to_string(kRelations.size()) + "]");
  }
  if (positives == 0) throw std::invalid_argument("synthetic task: positives must be at least 1");
  if (positives + lexical_decoys + wrong_relation > sentences_per_article) {
    throw std::invalid_argument("synthetic task: positives + lexical_decoys + wrong_relation exceed sentences_per_article");
  }
  if (wrong_relation > 0 && relations < 2) throw std::invalid_argument("synthetic task: wrong_relation needs two relations");
  if (vocab_size < kFunctionWords.size() + relations + 2 * 4) {
    throw std::invalid_argument("synthetic task: vocab_size too small");
  }
  if (train_questions + test_questions == 0) throw std::invalid_argument("synthetic task: no questions requested");
  const std::size_t names = vocab_size - kFunctionWords.size() - relations;
  const std::size_t subjects = (train_questions + test_questions + relations - 1) / relations;
  if (names < subjects + 4) {
    throw std::invalid_argument("synthetic task: vocab_size leaves too few names for the requested questions");
  }
}

SyntheticTask generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  // Answers and bystanders come from disjoint name pools, so a sentence that
  // only mentions bystanders never contains an answer to another question.
  const std::size_t names = spec.vocab_size - kFunctionWords.size() - spec.relations;
  const std::size_t n_subjects = (spec.train_questions + spec.test_questions + spec.relations - 1) / spec.relations;
  const std::size_t n_answers = (names - n_subjects) * 3 / 5;
  const auto subjects = make_names(n_subjects, {"ran", "tol", "mek"});
  const auto answers = make_names(n_answers, {"do", "li", "vu"});
  const auto bystanders = make_names(names - n_subjects - n_answers, {"ka", "sen", "wy"});
  const std::vector<std::string> relations(kRelations.begin(), kRelations.begin() + static_cast<std::ptrdiff_t>(spec.relations));

  SyntheticTask task;
  task.vocabulary = kFunctionWords;
  task.vocabulary.insert(task.vocabulary.end(), relations.begin(), relations.end());
  task.vocabulary.insert(task.vocabulary.end(), subjects.begin(), subjects.end());
  task.vocabulary.insert(task.vocabulary.end(), answers.begin(), answers.end());
  task.vocabulary.insert(task.vocabulary.end(), bystanders.begin(), bystanders.end());

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (std::size_t r = 0; r < relations.size(); ++r) pairs.emplace_back(s, r);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  pairs.resize(spec.train_questions + spec.test_questions);

  std::uniform_int_distribution<std::size_t> pick_answer(0, answers.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_bystander(0, bystanders.size() - 1);

  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto& subj = subjects[pairs[q].first];
    const auto& rel = relations[pairs[q].second];
    const std::string& a = answers[pick_answer(rng)];

    std::vector<std::string> front;
    for (std::size_t i = 0; i < spec.lexical_decoys; ++i) {
      const auto& b = bystanders[pick_bystander(rng)];
      front.push_back(sentence({b, "is", "near", "the", rel, "of", "the", subj, "."}));
    }
    std::vector<std::string> rest;
    std::bernoulli_distribution coin(0.5);
    rest.push_back(sentence({a, "is", "the", rel, "of", subj, "."}));
    for (std::size_t i = 0; i < spec.wrong_relation; ++i) {
      const auto& other_rel = relations[(pairs[q].second + 1 + i % (relations.size() - 1)) % relations.size()];
      rest.push_back(sentence({bystanders[pick_bystander(rng)], "is", "the", other_rel, "of", subj, "."}));
    }
    for (std::size_t i = 1; i < spec.positives; ++i) {
      std::size_t bi = pick_answer(rng);
      while (answers[bi] == a) bi = pick_answer(rng);
      const auto& b = answers[bi];
      const bool answer_first = coin(rng);
      rest.push_back(sentence({answer_first ? a : b, "met", answer_first ? b : a, "in", subj, "near", "the", rel, "of",
                               subj, "."}));
    }
    while (front.size() + rest.size() < spec.sentences_per_article) {
      std::size_t b = pick_answer(rng);
      while (answers[b] == a) b = pick_answer(rng);
      std::size_t c = pick_answer(rng);
      while (c == b || answers[c] == a) c = pick_answer(rng);
      rest.push_back(sentence({answers[b], "met", answers[c], "in", subj, "near", "the", rel, "of", subj, "."}));
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    front.insert(front.end(), rest.begin(), rest.end());

    retrieval::Document doc;
    char id[32];
    std::snprintf(id, sizeof id, "d%04zu", q);
    doc.id = id;
    doc.title = subj;
    for (const auto& s : front) doc.text += (doc.text.empty() ? "" : " ") + s;
    task.corpus.push_back(std::move(doc));

    retrieval::Question question;
    std::snprintf(id, sizeof id, "q%04zu", q);
    question.id = id;
    question.question = sentence({"who", "is", "the", rel, "of", subj, "?"});
    question.answers = {a};
    (q < spec.train_questions ? task.train : task.test).push_back(std::move(question));
  }
  return task;
}

}  // namespace r3::app
