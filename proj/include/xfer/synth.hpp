#ifndef XFER_SYNTH_HPP
#define XFER_SYNTH_HPP

#include <cstdint>

#include "xfer/conllu.hpp"
#include "xfer/substructure.hpp"

namespace xfer {

// Synthetic corpus generator for desk-scale experiments.
//
// Parsing sentences are sequences of noun phrases (optional determiner +
// noun) around a single verb, with an optional trailing punctuation mark:
// the verb heads the sentence (root), nouns attach to the verb (arg),
// determiners to the following noun (det), punctuation to the verb (punct).
// Tagging sentences draw forms from a lexicon with a fixed true tag per
// form. noise is the per-token probability of corrupting the gold
// head/label or tag.
struct SynthConfig {
  Task task = Task::Parsing;
  int num_sentences = 100;
  int min_len = 3;
  int max_len = 8;
  int vocab_size = 30;  // forms per word class / per tag
  double noise = 0.0;
  uint64_t seed = 1;
};

Corpus synth_corpus(const SynthConfig& config);

}  // namespace xfer

#endif
