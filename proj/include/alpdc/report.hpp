#pragma once

#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "alpdc/langid.hpp"
#include "alpdc/metrics.hpp"

namespace alpdc {

/// Keys follow the evaluation table row labels, whitespace replaced by underscores.
inline nlohmann::ordered_json to_json(const metrics::EvaluationReport& r, bool bleu_percent = false) {
  const double scale = bleu_percent ? 100.0 : 1.0;
  nlohmann::ordered_json j;
  j["BLEU"] = r.bleu.bleu * scale;
  j["Precisions"] = r.bleu.precisions;
  j["Brevity_penalty"] = r.bleu.brevity_penalty;
  j["Length_ratio"] = r.bleu.length_ratio;
  j["translation_length"] = r.bleu.translation_length;
  j["reference_length"] = r.bleu.reference_length;
  j["cHRF_score"] = r.chrf.score;
  j["char_order"] = r.chrf.char_order;
  j["word_order"] = r.chrf.word_order;
  j["beta"] = r.chrf.beta;
  j["METEOR"] = r.meteor.score;
  j["TER_score"] = r.ter.score;
  j["num_edits"] = r.ter.num_edits;
  j["ref_length"] = r.ter.ref_length;
  return j;
}

inline std::string report_json(const metrics::EvaluationReport& r, bool bleu_percent = false) {
  return to_json(r, bleu_percent).dump(2) + "\n";
}

/// Two-column table for terminals.
inline std::string report_table(const metrics::EvaluationReport& r, bool bleu_percent = false) {
  std::ostringstream out;
  auto row = [&](const char* name, const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-20s", name);
    out << buf << value << "\n";
  };
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::string precisions = "[";
  for (std::size_t i = 0; i < r.bleu.precisions.size(); ++i) {
    precisions += (i ? ", " : "") + num(r.bleu.precisions[i]);
  }
  precisions += "]";
  row("Metrics", "Score");
  row("BLEU", num(r.bleu.bleu * (bleu_percent ? 100.0 : 1.0)));
  row("Precisions", precisions);
  row("Brevity_penalty", num(r.bleu.brevity_penalty));
  row("Length_ratio", num(r.bleu.length_ratio));
  row("translation_length", std::to_string(r.bleu.translation_length));
  row("reference_length", std::to_string(r.bleu.reference_length));
  row("cHRF_score", num(r.chrf.score));
  row("char_order", std::to_string(r.chrf.char_order));
  row("word_order", std::to_string(r.chrf.word_order));
  row("beta", num(r.chrf.beta));
  row("METEOR", num(r.meteor.score));
  row("TER_score", num(r.ter.score));
  row("num_edits", std::to_string(r.ter.num_edits));
  row("ref_length", num(r.ter.ref_length));
  return out.str();
}

inline nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["language"] = p.best;
  j["score"] = p.score;
  j["margin"] = p.margin;
  j["ranking"] = nlohmann::ordered_json::array();
  for (const auto& [lang, score] : p.ranking) j["ranking"].push_back({{"lang", lang}, {"score", score}});
  return j;
}

}  // namespace alpdc
