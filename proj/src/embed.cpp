/*
 * Copyright 2026 the tagsem authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file
 * except in compliance with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the
 * License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
 * either express or implied. See the License for the specific language governing permissions
 * and limitations under the License.
 */

#include "embed.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace tagsem {

using nlohmann::json;

EmbeddingRecord embed_in_context(const EmbeddingModel& model, const std::string& tag,
                                 const std::vector<std::string>& doc_tags,
                                 const std::string& doc_id) {
  const int idx = model.tag_index(tag);
  if (idx < 0) {
    throw Error(ErrorCode::kValidation,
                "tag '" + tag + "' is out of vocabulary; use the OOV centroid path");
  }
  const Vector context = model.context_for_tags(doc_tags);
  EmbeddingRecord record;
  record.tag = tag;
  record.doc_id = doc_id;
  record.ce = model.ce(idx, context);
  record.provenance = EmbeddingRecord::Provenance::kInVocabulary;
  return record;
}

EmbeddingRecord embed_oov(const EmbeddingModel& model, const std::string& oov_tag,
                          const std::vector<std::string>& doc_tags,
                          const std::string& doc_id) {
  // Companions: the in-vocabulary tags of the document, the OOV tag excluded.
  std::vector<std::string> companions;
  for (const auto& tag : doc_tags) {
    if (tag != oov_tag && model.tag_index(tag) >= 0) companions.push_back(tag);
  }
  if (companions.empty()) {
    throw Error(ErrorCode::kValidation, "OOV tag '" + oov_tag + "' has no context");
  }

  const std::vector<int> indices = model.known_indices(companions);
  const Vector context = model.context_for_indices(indices);

  Vector centroid(static_cast<size_t>(model.embedding_dim()), 0.0);
  for (const int idx : indices) {
    const Vector ce = model.ce(idx, context);
    for (size_t j = 0; j < centroid.size(); ++j) centroid[j] += ce[j];
  }
  for (auto& v : centroid) v /= static_cast<double>(indices.size());

  EmbeddingRecord record;
  record.tag = oov_tag;
  record.doc_id = doc_id;
  record.ce = std::move(centroid);
  record.provenance = EmbeddingRecord::Provenance::kOovCentroid;
  return record;
}

namespace {

const char* provenance_name(EmbeddingRecord::Provenance p) {
  return p == EmbeddingRecord::Provenance::kInVocabulary ? "in_vocabulary" : "oov_centroid";
}

EmbeddingRecord::Provenance provenance_from(const std::string& name) {
  if (name == "in_vocabulary") return EmbeddingRecord::Provenance::kInVocabulary;
  if (name == "oov_centroid") return EmbeddingRecord::Provenance::kOovCentroid;
  throw Error(ErrorCode::kParse, "unknown provenance: " + name);
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void export_embeddings(const std::vector<EmbeddingRecord>& records, const std::string& path,
                       EmbeddingFormat format) {
  if (records.empty()) {
    throw Error(ErrorCode::kValidation, "no embedding records to export");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write embeddings: " + path);

  if (format == EmbeddingFormat::kJsonl) {
    for (const auto& record : records) {
      json line;
      line["tag"] = record.tag;
      line["doc"] = record.doc_id;
      line["prov"] = provenance_name(record.provenance);
      line["ce"] = record.ce;
      out << line.dump() << "\n";
    }
  } else {
    const size_t dim = records.front().ce.size();
    out << "tag,doc,prov";
    for (size_t j = 0; j < dim; ++j) out << ",ce_" << j;
    out << "\n";
    for (const auto& record : records) {
      out << record.tag << "," << record.doc_id << "," << provenance_name(record.provenance);
      for (const double v : record.ce) out << "," << format_g17(v);
      out << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::vector<EmbeddingRecord> load_embeddings(const std::string& path, EmbeddingFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embeddings: " + path);

  std::vector<EmbeddingRecord> records;
  std::string line;
  size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (format == EmbeddingFormat::kJsonl) {
      json parsed;
      try {
        parsed = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_number) + ": " + e.what());
      }
      EmbeddingRecord record;
      record.tag = parsed.at("tag").get<std::string>();
      record.doc_id = parsed.at("doc").get<std::string>();
      record.provenance = provenance_from(parsed.at("prov").get<std::string>());
      record.ce = parsed.at("ce").get<Vector>();
      records.push_back(std::move(record));
    } else {
      if (!header_seen) {
        header_seen = true;
        continue;
      }
      std::stringstream ss(line);
      std::string field;
      EmbeddingRecord record;
      if (!std::getline(ss, record.tag, ',') || !std::getline(ss, record.doc_id, ',') ||
          !std::getline(ss, field, ',')) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_number) + ": short row");
      }
      record.provenance = provenance_from(field);
      while (std::getline(ss, field, ',')) record.ce.push_back(std::stod(field));
      records.push_back(std::move(record));
    }
  }
  return records;
}

}  // namespace tagsem
