#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kidex/core.hpp"
#include "kidex/evalkit.hpp"
#include "kidex/tabrec.hpp"
#include "kidex/textprep.hpp"

namespace kidex::gen {

struct GenOptions {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double noise = 0.0;  // in [0,1]
};

/// What the noise pass did to one table. `expected_missing` is set when every
/// anchor cell of the table was pushed below the confidence threshold, so the
/// table cannot be identified.
struct NoiseRecord {
  std::string doc_id;
  TableType type = TableType::performance_scenarios;
  std::size_t anchor_cells = 0;
  std::size_t dropped_anchor_cells = 0;
  std::size_t confused_chars = 0;
  bool expected_missing = false;
};

struct GeneratedDoc {
  textprep::PageText text;
  bool english = false;
  std::vector<PageDetections> masks;
  std::vector<evalkit::GoldField> fields;
  std::vector<tabrec::TableRow> tables;
  std::vector<NoiseRecord> noise;
};

/// Document i depends only on (seed, i); noise draws come from a separate
/// stream, so the same seed yields the same content at every noise level.
GeneratedDoc generate_document(std::size_t index, std::uint64_t seed, double noise);

/// Throws Error if n == 0 or noise lies outside [0,1].
std::vector<GeneratedDoc> generate_corpus(const GenOptions& opts);

/// Writes docs/<id>.json, masks/<id>_p<page>.json, gold/fields.jsonl,
/// gold/tables.jsonl and gold/noise.jsonl under `out_dir`. Throws IoError.
void write_corpus(const std::vector<GeneratedDoc>& docs, const std::string& out_dir);

/// generate_corpus followed by write_corpus.
void gen_corpus(const GenOptions& opts, const std::string& out_dir);

OrderedJson to_json(const NoiseRecord& r);

/// Width of the zero-padded number in generated doc ids ("kid_00042").
inline constexpr int kDocIdDigits = 5;
std::string doc_id_for(std::size_t index);

}  // namespace kidex::gen
