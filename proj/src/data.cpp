#include "gca/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace gca {

namespace {

constexpr const char* kHeader = "drug_id\ttarget_id\tsmiles\tfasta\taffinity";
constexpr const char* kDrugPool = "CNOPS=#()123456789cno+-";
constexpr const char* kProteinPool = "ACDEFGHIKLMNPQRSTVWY";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

double parse_affinity(const std::string& text, std::size_t line_no) {
  if (text.empty()) throw_data("dataset line " + std::to_string(line_no) + ": empty affinity");
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw_data("dataset line " + std::to_string(line_no) + ": malformed affinity '" + text + "'");
  }
  if (consumed != text.size()) {
    throw_data("dataset line " + std::to_string(line_no) + ": malformed affinity '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw_data("dataset line " + std::to_string(line_no) + ": non-finite affinity '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<AffinityRecord> load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("dataset: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw_data("dataset: " + path + " is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw_data("dataset line 1: expected header '" + std::string(kHeader) + "'");
  }
  std::vector<AffinityRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw_data("dataset line " + std::to_string(line_no) + ": expected 5 fields, got " +
                 std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (fields[i].empty()) {
        throw_data("dataset line " + std::to_string(line_no) + ": empty field " +
                   std::to_string(i + 1));
      }
    }
    AffinityRecord rec;
    rec.drug_id = fields[0];
    rec.target_id = fields[1];
    rec.smiles = fields[2];
    rec.fasta = fields[3];
    rec.affinity = parse_affinity(fields[4], line_no);
    if (!seen.insert({rec.drug_id, rec.target_id}).second) {
      throw_data("dataset line " + std::to_string(line_no) + ": duplicate pair (" +
                 rec.drug_id + ", " + rec.target_id + ")");
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw_data("dataset: " + path + " has no records");
  return records;
}

void write_records_tsv(const std::vector<AffinityRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("dataset: cannot open " + path + " for writing");
  out << kHeader << '\n';
  std::ostringstream line;
  for (const auto& rec : records) {
    line.str("");
    line.precision(17);
    line << rec.drug_id << '\t' << rec.target_id << '\t' << rec.smiles << '\t' << rec.fasta
         << '\t' << rec.affinity << '\n';
    out << line.str();
  }
  if (!out) throw_data("dataset: write to " + path + " failed");
}

Split split_dataset(std::vector<AffinityRecord> records, double test_fraction,
                    std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw_config("split: test_fraction must lie in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(records.begin(), records.end(), rng);
  const std::size_t n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(records.size()) * test_fraction + 1e-9));
  Split split;
  split.test.assign(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(records.begin() + static_cast<std::ptrdiff_t>(n_test), records.end());
  return split;
}

void write_sites_file(const SiteMap& sites, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("sites: cannot open " + path + " for writing");
  out << "drug_id\ttarget_id\tpositions\n";
  for (const auto& [key, positions] : sites) {
    out << key.first << '\t' << key.second << '\t';
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (i) out << ',';
      out << positions[i];
    }
    out << '\n';
  }
  if (!out) throw_data("sites: write to " + path + " failed");
}

SiteMap load_sites_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("sites: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw_data("sites: " + path + " is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "drug_id\ttarget_id\tpositions") {
    throw_data("sites line 1: expected header 'drug_id\ttarget_id\tpositions'");
  }
  SiteMap sites;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw_data("sites line " + std::to_string(line_no) + ": expected 3 fields");
    }
    std::vector<std::size_t> positions;
    if (!fields[2].empty()) {
      std::stringstream ss(fields[2]);
      std::string token;
      while (std::getline(ss, token, ',')) {
        try {
          positions.push_back(static_cast<std::size_t>(std::stoull(token)));
        } catch (const std::exception&) {
          throw_data("sites line " + std::to_string(line_no) + ": bad position '" + token + "'");
        }
      }
    }
    sites[{fields[0], fields[1]}] = std::move(positions);
  }
  return sites;
}

void SyntheticSpec::validate() const {
  if (n_drugs == 0 || n_targets == 0) throw_config("synthetic: need at least one drug and target");
  if (drug_alphabet == 0 || drug_alphabet > std::string(kDrugPool).size()) {
    throw_config("synthetic: drug_alphabet must lie in [1, " +
                 std::to_string(std::string(kDrugPool).size()) + "]");
  }
  if (protein_alphabet == 0 || protein_alphabet > std::string(kProteinPool).size()) {
    throw_config("synthetic: protein_alphabet must lie in [1, " +
                 std::to_string(std::string(kProteinPool).size()) + "]");
  }
  if (drug_len_min == 0 || drug_len_min > drug_len_max) {
    throw_config("synthetic: bad drug length range");
  }
  if (protein_len_min == 0 || protein_len_min > protein_len_max) {
    throw_config("synthetic: bad protein length range");
  }
  std::size_t drug_motif_total = 0, protein_motif_total = 0;
  for (const auto& m : motifs) {
    if (m.drug_motif.empty() || m.protein_motif.empty()) {
      throw_config("synthetic: motifs must be non-empty");
    }
    drug_motif_total += m.drug_motif.size() + 1;
    protein_motif_total += m.protein_motif.size() + 1;
    if (m.drug_motif.size() >= drug_len_min) {
      throw_config("synthetic: drug motif '" + m.drug_motif +
                   "' does not fit the minimum drug length");
    }
    if (m.protein_motif.size() >= protein_len_min) {
      throw_config("synthetic: protein motif '" + m.protein_motif +
                   "' does not fit the minimum protein length");
    }
  }
  // All motifs must be plantable simultaneously at disjoint positions.
  if (!motifs.empty() && (drug_motif_total > drug_len_min || protein_motif_total > protein_len_min)) {
    throw_config("synthetic: motifs do not fit the minimum sequence lengths together");
  }
  if (noise_sigma < 0.0) throw_config("synthetic: noise_sigma must be >= 0");
  if (motif_prob < 0.0 || motif_prob > 1.0) throw_config("synthetic: motif_prob must lie in [0, 1]");
  if (pair_fraction <= 0.0 || pair_fraction > 1.0) {
    throw_config("synthetic: pair_fraction must lie in (0, 1]");
  }
}

namespace {

struct PlantedSequence {
  std::string text;
  // motif index -> start position, or npos when absent
  std::vector<std::size_t> motif_at;
};

PlantedSequence make_sequence(std::mt19937_64& rng, const char* pool, std::size_t alphabet,
                              std::size_t len_min, std::size_t len_max,
                              const std::vector<std::string>& motifs, double motif_prob) {
  std::uniform_int_distribution<std::size_t> len_dist(len_min, len_max);
  std::uniform_int_distribution<std::size_t> char_dist(0, alphabet - 1);
  std::bernoulli_distribution present(motif_prob);

  PlantedSequence seq;
  const std::size_t len = len_dist(rng);
  seq.text.resize(len);
  for (auto& c : seq.text) c = pool[char_dist(rng)];
  seq.motif_at.assign(motifs.size(), std::string::npos);

  std::vector<std::pair<std::size_t, std::size_t>> used;  // [start, end)
  for (std::size_t mi = 0; mi < motifs.size(); ++mi) {
    if (!present(rng)) continue;
    const std::size_t mlen = motifs[mi].size();
    std::uniform_int_distribution<std::size_t> pos_dist(0, len - mlen);
    std::size_t pos = 0;
    bool placed = false;
    for (int attempt = 0; attempt < 256 && !placed; ++attempt) {
      pos = pos_dist(rng);
      placed = true;
      for (const auto& [s, e] : used) {
        if (pos < e && pos + mlen > s) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) continue;  // pathological density; skip this motif
    seq.text.replace(pos, mlen, motifs[mi]);
    used.emplace_back(pos, pos + mlen);
    seq.motif_at[mi] = pos;
  }
  return seq;
}

std::string numbered_id(const char* prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix;
  if (i < 1000) os << (i < 10 ? "000" : i < 100 ? "00" : "0");
  os << i;
  return os.str();
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<std::string> drug_motifs, protein_motifs;
  for (const auto& m : spec.motifs) {
    drug_motifs.push_back(m.drug_motif);
    protein_motifs.push_back(m.protein_motif);
  }

  std::vector<PlantedSequence> drugs, targets;
  drugs.reserve(spec.n_drugs);
  targets.reserve(spec.n_targets);
  for (std::size_t i = 0; i < spec.n_drugs; ++i) {
    drugs.push_back(make_sequence(rng, kDrugPool, spec.drug_alphabet, spec.drug_len_min,
                                  spec.drug_len_max, drug_motifs, spec.motif_prob));
  }
  for (std::size_t i = 0; i < spec.n_targets; ++i) {
    targets.push_back(make_sequence(rng, kProteinPool, spec.protein_alphabet,
                                    spec.protein_len_min, spec.protein_len_max,
                                    protein_motifs, spec.motif_prob));
  }

  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  std::bernoulli_distribution keep(spec.pair_fraction);
  SyntheticData data;
  for (std::size_t di = 0; di < spec.n_drugs; ++di) {
    const std::string drug_id = numbered_id("D", di);
    for (std::size_t ti = 0; ti < spec.n_targets; ++ti) {
      if (spec.pair_fraction < 1.0 && !keep(rng)) continue;
      const std::string target_id = numbered_id("T", ti);
      AffinityRecord rec;
      rec.drug_id = drug_id;
      rec.target_id = target_id;
      rec.smiles = drugs[di].text;
      rec.fasta = targets[ti].text;
      double affinity = spec.base_affinity;
      std::vector<std::size_t> sites;
      for (std::size_t mi = 0; mi < spec.motifs.size(); ++mi) {
        const bool drug_has = drugs[di].motif_at[mi] != std::string::npos;
        const bool target_has = targets[ti].motif_at[mi] != std::string::npos;
        if (drug_has && target_has) {
          affinity += spec.motifs[mi].bonus;
          const std::size_t start = targets[ti].motif_at[mi];
          for (std::size_t off = 0; off < spec.motifs[mi].protein_motif.size(); ++off) {
            sites.push_back(start + off);
          }
        }
      }
      if (spec.noise_sigma > 0.0) affinity += noise(rng);
      rec.affinity = affinity;
      std::sort(sites.begin(), sites.end());
      data.sites[{drug_id, target_id}] = std::move(sites);
      data.records.push_back(std::move(rec));
    }
  }
  return data;
}

}  // namespace gca
