#include "gca/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace gca {

const char* kind_name(SequenceKind kind) {
  return kind == SequenceKind::Drug ? "drug" : "protein";
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, SequenceKind kind) {
  if (corpus.empty()) {
    throw_data(std::string("build_vocab: empty ") + kind_name(kind) + " corpus");
  }
  std::set<char> symbols;
  for (const auto& s : corpus) symbols.insert(s.begin(), s.end());
  Vocabulary v;
  v.id_to_symbol_.push_back("<pad>");
  v.id_to_symbol_.push_back("<unk>");
  for (char c : symbols) {
    v.symbol_to_id_[c] = static_cast<int>(v.id_to_symbol_.size());
    v.id_to_symbol_.push_back(std::string(1, c));
  }
  return v;
}

int Vocabulary::id_of(char symbol) const {
  auto it = symbol_to_id_.find(symbol);
  return it == symbol_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(char symbol) const {
  return symbol_to_id_.count(symbol) > 0;
}

const std::string& Vocabulary::symbol_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_symbol_.size()) {
    throw_index("vocabulary: id " + std::to_string(id) + " out of range for size " +
                std::to_string(id_to_symbol_.size()));
  }
  return id_to_symbol_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("vocabulary: cannot open " + path + " for writing");
  for (std::size_t id = 0; id < id_to_symbol_.size(); ++id) {
    out << id_to_symbol_[id] << '\t' << id << '\n';
  }
  if (!out) throw_data("vocabulary: write to " + path + " failed");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("vocabulary: cannot open " + path);
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find_last_of('\t');
    if (tab == std::string::npos) {
      throw_data("vocabulary: " + path + " line " + std::to_string(line_no) + ": missing tab");
    }
    const std::string symbol = line.substr(0, tab);
    const std::string id_text = line.substr(tab + 1);
    int id = 0;
    try {
      id = std::stoi(id_text);
    } catch (const std::exception&) {
      throw_data("vocabulary: " + path + " line " + std::to_string(line_no) +
                 ": bad id '" + id_text + "'");
    }
    if (id != static_cast<int>(v.id_to_symbol_.size())) {
      throw_data("vocabulary: " + path + " line " + std::to_string(line_no) +
                 ": ids must be contiguous from 0, got " + std::to_string(id));
    }
    v.id_to_symbol_.push_back(symbol);
    if (symbol.size() == 1) v.symbol_to_id_[symbol[0]] = id;
  }
  if (v.id_to_symbol_.size() < 2 || v.id_to_symbol_[0] != "<pad>" || v.id_to_symbol_[1] != "<unk>") {
    throw_data("vocabulary: " + path + " does not start with the reserved <pad>/<unk> entries");
  }
  return v;
}

TokenSequence tokenize(const std::string& s, const Vocabulary& vocab,
                       std::size_t max_len, SequenceKind kind) {
  if (max_len < 1) throw_config("tokenize: max_len must be >= 1");
  if (s.empty()) throw_data(std::string("tokenize: empty ") + kind_name(kind) + " string");
  TokenSequence seq;
  seq.kind = kind;
  seq.ids.assign(max_len, Vocabulary::kPadId);
  seq.valid_len = std::min(s.size(), max_len);
  for (std::size_t i = 0; i < seq.valid_len; ++i) seq.ids[i] = vocab.id_of(s[i]);
  return seq;
}

}  // namespace gca
