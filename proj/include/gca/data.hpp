#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gca/error.hpp"

namespace gca {

struct AffinityRecord {
  std::string drug_id, target_id, smiles, fasta;
  double affinity = 0.0;
};

// TSV with header `drug_id target_id smiles fasta affinity`. Validation
// errors carry 1-based line numbers.
std::vector<AffinityRecord> load_records(const std::string& path);
void write_records_tsv(const std::vector<AffinityRecord>& records, const std::string& path);

struct Split {
  std::vector<AffinityRecord> train, test;
};

// Seeded shuffle, then the first floor(n * test_fraction) records become the
// test split.
Split split_dataset(std::vector<AffinityRecord> records, double test_fraction,
                    std::uint64_t seed);

using SiteMap = std::map<std::pair<std::string, std::string>, std::vector<std::size_t>>;

// Sites file: `drug_id target_id positions`, positions comma-separated
// 0-based indices (empty when the record has no active site).
void write_sites_file(const SiteMap& sites, const std::string& path);
SiteMap load_sites_file(const std::string& path);

struct MotifPair {
  std::string drug_motif, protein_motif;
  double bonus = 0.0;
};

struct SyntheticSpec {
  std::size_t n_drugs = 200;
  std::size_t n_targets = 50;
  std::size_t drug_alphabet = 8;     // prefix of the drug character pool
  std::size_t protein_alphabet = 20; // prefix of the amino-acid pool
  std::size_t drug_len_min = 16, drug_len_max = 24;
  std::size_t protein_len_min = 40, protein_len_max = 60;
  std::vector<MotifPair> motifs = {{"ZZZ", "zzz", 2.0}, {"JJJ", "jjj", 1.5}};
  double motif_prob = 0.5;    // independent presence probability per side
  double base_affinity = 5.0;
  double noise_sigma = 0.3;
  double pair_fraction = 1.0; // fraction of the drug x target grid emitted
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  std::vector<AffinityRecord> records;
  SiteMap sites;
};

// Random sequences with motifs planted at disjoint, uniformly drawn
// positions. The affinity is base + sum of bonuses over motif pairs present
// on both sides + Gaussian noise; a record's sites are the protein positions
// of those co-occurring pairs. Fully deterministic per seed.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

}  // namespace gca
