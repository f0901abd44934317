#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numeric>

#include "gca/analysis.hpp"
#include "gca/data.hpp"
#include "gca/pipeline.hpp"

using namespace gca;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::ofstream out(name, std::ios::binary);
  out << content;
  return name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

constexpr const char* kToySix =
    "drug_id\ttarget_id\tsmiles\tfasta\taffinity\n"
    "D1\tT1\tCCO\tMKV\t5.0\n"
    "D1\tT2\tCCO\tMKW\t6.0\n"
    "D2\tT1\tCCN\tMKV\t7.0\n"
    "D2\tT2\tCCN\tMKW\t8.0\n"
    "D3\tT1\tCC=O\tMKV\t9.0\n"
    "D3\tT2\tCC=O\tMKW\t10.0\n";

}  // namespace

TEST_CASE("six-row toy file splits 5/1 at test fraction 1/6") {
  auto path = write_temp("toy6.tmp.tsv", kToySix);
  auto records = load_records(path);
  CHECK(records.size() == 6);
  auto split = split_dataset(records, 1.0 / 6.0, 1);
  CHECK(split.train.size() == 5);
  CHECK(split.test.size() == 1);
  std::remove(path.c_str());
}

TEST_CASE("malformed affinity reports its line number") {
  auto path = write_temp("bad3.tmp.tsv",
                         "drug_id\ttarget_id\tsmiles\tfasta\taffinity\n"
                         "D1\tT1\tCCO\tMKV\t5.0\n"
                         "D2\tT1\tCCN\tMKV\tabc\n");
  try {
    load_records(path);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("duplicate pairs and empty fields are data errors with line numbers") {
  auto dup = write_temp("dup.tmp.tsv",
                        "drug_id\ttarget_id\tsmiles\tfasta\taffinity\n"
                        "D1\tT1\tCCO\tMKV\t5.0\n"
                        "D1\tT1\tCCO\tMKV\t6.0\n");
  CHECK_THROWS_WITH_AS(load_records(dup), doctest::Contains("line 3"), Error);
  std::remove(dup.c_str());

  auto empty = write_temp("empty.tmp.tsv",
                          "drug_id\ttarget_id\tsmiles\tfasta\taffinity\n"
                          "D1\tT1\t\tMKV\t5.0\n");
  CHECK_THROWS_AS(load_records(empty), Error);
  std::remove(empty.c_str());
}

TEST_CASE("records round trip through the TSV writer") {
  auto path = write_temp("toy6b.tmp.tsv", kToySix);
  auto records = load_records(path);
  write_records_tsv(records, "toy6c.tmp.tsv");
  auto again = load_records("toy6c.tmp.tsv");
  REQUIRE(again.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(again[i].drug_id == records[i].drug_id);
    CHECK(again[i].smiles == records[i].smiles);
    CHECK(again[i].affinity == records[i].affinity);
  }
  std::remove(path.c_str());
  std::remove("toy6c.tmp.tsv");
}

TEST_CASE("synthetic: no noise and no motifs gives the base affinity exactly") {
  SyntheticSpec spec;
  spec.n_drugs = 4;
  spec.n_targets = 3;
  spec.motifs.clear();
  spec.noise_sigma = 0.0;
  spec.base_affinity = 5.0;
  spec.drug_len_min = 8;
  spec.drug_len_max = 12;
  spec.protein_len_min = 12;
  spec.protein_len_max = 20;
  auto data = gen_synthetic(spec);
  CHECK(data.records.size() == 12);
  for (const auto& rec : data.records) CHECK(rec.affinity == 5.0);
  for (const auto& [key, sites] : data.sites) CHECK(sites.empty());
}

TEST_CASE("synthetic: one co-occurring motif adds exactly its bonus when sigma is 0") {
  SyntheticSpec spec;
  spec.n_drugs = 30;
  spec.n_targets = 10;
  spec.motifs = {{"ZZ", "zzz", 2.0}};
  spec.noise_sigma = 0.0;
  spec.base_affinity = 5.0;
  auto data = gen_synthetic(spec);
  bool saw_bonus = false, saw_base = false;
  for (const auto& rec : data.records) {
    const bool both = rec.smiles.find("ZZ") != std::string::npos &&
                      rec.fasta.find("zzz") != std::string::npos;
    if (both) {
      CHECK(rec.affinity == 7.0);
      saw_bonus = true;
    } else {
      CHECK(rec.affinity == 5.0);
      saw_base = true;
    }
  }
  CHECK(saw_bonus);
  CHECK(saw_base);
}

TEST_CASE("synthetic generation is byte-identical for the same seed") {
  SyntheticSpec spec;
  spec.n_drugs = 6;
  spec.n_targets = 4;
  auto a = gen_synthetic(spec);
  auto b = gen_synthetic(spec);
  write_records_tsv(a.records, "synth_a.tmp.tsv");
  write_records_tsv(b.records, "synth_b.tmp.tsv");
  write_sites_file(a.sites, "synth_a.tmp.sites");
  write_sites_file(b.sites, "synth_b.tmp.sites");
  CHECK(slurp("synth_a.tmp.tsv") == slurp("synth_b.tmp.tsv"));
  CHECK(slurp("synth_a.tmp.sites") == slurp("synth_b.tmp.sites"));
  for (const char* f : {"synth_a.tmp.tsv", "synth_b.tmp.tsv", "synth_a.tmp.sites",
                        "synth_b.tmp.sites"}) {
    std::remove(f);
  }
}

TEST_CASE("synthetic ground-truth sites index real motif occurrences") {
  SyntheticSpec spec;
  spec.n_drugs = 12;
  spec.n_targets = 8;
  auto data = gen_synthetic(spec);
  std::map<std::string, std::string> fasta_of;
  for (const auto& rec : data.records) fasta_of[rec.target_id] = rec.fasta;
  std::size_t nonempty = 0;
  for (const auto& [key, sites] : data.sites) {
    const std::string& fasta = fasta_of.at(key.second);
    if (!sites.empty()) ++nonempty;
    for (std::size_t pos : sites) {
      REQUIRE(pos < fasta.size());
      const char c = fasta[pos];
      CHECK((c == 'z' || c == 'j'));  // default motif characters
    }
  }
  CHECK(nonempty > 0);
}

TEST_CASE("synthetic rejects motifs longer than the sequences") {
  SyntheticSpec spec;
  spec.drug_len_min = 3;
  spec.drug_len_max = 5;
  spec.motifs = {{"ZZZZZ", "zzz", 1.0}};
  try {
    gen_synthetic(spec);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("sites file round trip") {
  SiteMap sites;
  sites[{"D1", "T1"}] = {2, 5, 6};
  sites[{"D2", "T1"}] = {};
  write_sites_file(sites, "sites_rt.tmp");
  auto loaded = load_sites_file("sites_rt.tmp");
  CHECK(loaded == sites);
  std::remove("sites_rt.tmp");
}

TEST_CASE("bundled sample matches the published dataset scale") {
  const std::string path = std::string(GCA_SOURCE_DIR) + "/data/kiba_sample.tsv";
  auto records = load_records(path);
  CHECK(records.size() >= 24);
  double smiles_len = 0.0, fasta_len = 0.0;
  for (const auto& rec : records) {
    smiles_len += static_cast<double>(rec.smiles.size());
    fasta_len += static_cast<double>(rec.fasta.size());
    CHECK(rec.affinity >= 0.0);
    CHECK(rec.affinity <= 17.2);
  }
  smiles_len /= static_cast<double>(records.size());
  fasta_len /= static_cast<double>(records.size());
  CHECK(smiles_len >= 56.0);
  CHECK(smiles_len <= 63.0);
  CHECK(fasta_len >= 656.0);
  CHECK(fasta_len <= 712.0);
}

TEST_CASE("prepare_dataset fills vocabulary sizes and tokenizes both splits") {
  auto path = write_temp("toy6d.tmp.tsv", kToySix);
  RunConfig config;
  config.embed_dim = 8;
  config.max_len_drug = 10;
  config.max_len_protein = 12;
  config.head_hidden = 8;
  config.test_fraction = 1.0 / 6.0;
  auto prepared = prepare_dataset(load_records(path), config);
  CHECK(prepared.config.drug_vocab_size == prepared.drug_vocab.size());
  CHECK(prepared.config.protein_vocab_size == prepared.protein_vocab.size());
  CHECK(prepared.train.size() == 5);
  CHECK(prepared.test.size() == 1);
  CHECK(prepared.train[0].drug.ids.size() == 10);
  std::remove(path.c_str());
}
