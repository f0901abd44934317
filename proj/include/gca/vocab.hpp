#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gca/error.hpp"

namespace gca {

enum class SequenceKind { Drug, Protein };

const char* kind_name(SequenceKind kind);

// Character-level vocabulary. Id 0 is padding, id 1 is unknown; remaining
// ids are assigned to the distinct corpus characters in sorted order, so the
// mapping is independent of corpus order.
class Vocabulary {
 public:
  Vocabulary() = default;  // empty; fill via build() or load()

  static Vocabulary build(const std::vector<std::string>& corpus, SequenceKind kind);

  std::size_t size() const { return id_to_symbol_.size(); }
  int id_of(char symbol) const;           // unknown characters map to 1
  bool contains(char symbol) const;
  const std::string& symbol_of(int id) const;

  // One `symbol<TAB>id` per line, reserved ids first. Reserved symbols are
  // written as <pad> and <unk>.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

 private:
  std::vector<std::string> id_to_symbol_;
  std::map<char, int> symbol_to_id_;
};

// Fixed-length integer encoding of one sequence; positions >= valid_len hold
// the padding id.
struct TokenSequence {
  std::vector<int> ids;
  std::size_t valid_len = 0;
  SequenceKind kind = SequenceKind::Drug;

  std::size_t length() const { return ids.size(); }
};

// Character-by-character encoding: unknown characters become id 1, the
// string is truncated at max_len and right-padded with id 0.
TokenSequence tokenize(const std::string& s, const Vocabulary& vocab,
                       std::size_t max_len, SequenceKind kind);

}  // namespace gca
