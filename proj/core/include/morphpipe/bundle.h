#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "morphpipe/nn.h"
#include "morphpipe/pipeline.h"

namespace morphpipe {

inline constexpr std::string_view kBundleMagic = "morphpipe-bundle";
inline constexpr int kBundleFormatVersion = 1;

// Directory layout:
//   manifest          "key = value" lines
//   tokenizer.rules   tokenizer rule file
//   lemma.rules       lemmatizer rule dump
//   labels/*.txt      one label per line
//   params/<name>.bin one tensor each
// Static vectors are referenced by path and checked by fingerprint.
void save_bundle(const Pipeline& pipeline, const std::filesystem::path& dir);

struct LoadOptions {
  // Used instead of the manifest's vector path; must match its fingerprint.
  std::shared_ptr<const StaticVectors> vectors;
};

// Throws LoadError naming the offending file.
Pipeline load_bundle(const std::filesystem::path& dir, const LoadOptions& options = {});

// Tensor blob: "MPBLOB1 <name> <rank> <dims...>\n" then row-major float32
// little-endian values.
std::string encode_blob(const Param& param);
// Fills `param` (whose shape must match) from a blob. Throws LoadError.
void decode_blob(std::string_view bytes, Param& param, const std::string& file);

// "key = value" manifest parsing; throws LoadError on malformed lines.
std::map<std::string, std::string> parse_manifest(std::string_view text,
                                                  const std::string& file);

}  // namespace morphpipe
