#ifndef XFER_ENSEMBLE_HPP
#define XFER_ENSEMBLE_HPP

#include "xfer/chart.hpp"
#include "xfer/conllu.hpp"
#include "xfer/model.hpp"

namespace xfer {

// Per-source marginal distributions for one sentence.
std::vector<SubstructureDist> source_marginals(const EnsembleSpec& ensemble,
                                               const Sentence& sentence);

std::vector<DepTree> source_one_bests_dep(const EnsembleSpec& ensemble,
                                          const Sentence& sentence);
std::vector<TagSeq> source_one_bests_chain(const EnsembleSpec& ensemble,
                                           const Sentence& sentence);

DepChart pptx_dep_chart(const EnsembleSpec& ensemble, const Sentence& sentence,
                        double sigma);
DepChart lop_dep_chart(const EnsembleSpec& ensemble, const Sentence& sentence,
                       double sigma);
ChainChart pptx_chain_chart(const EnsembleSpec& ensemble,
                            const Sentence& sentence, double sigma);
ChainChart lop_chain_chart(const EnsembleSpec& ensemble,
                           const Sentence& sentence, double sigma);

// Majority voting: arc votes fed to MST decoding for parsing, per-token
// mode of the 1-best tags for tagging.
DepTree mv_predict_dep(const EnsembleSpec& ensemble, const Sentence& sentence);
TagSeq mv_predict_chain(const EnsembleSpec& ensemble,
                        const Sentence& sentence);

// Gold substructure id per position, in the SubstructureDist id space.
std::vector<int> gold_substructure_ids(Task task, const Sentence& sentence,
                                       const std::vector<std::string>& inventory);

// Pool-weight learning on a small labelled sample: gradient descent on the
// mean negative log pooled probability of the gold substructures, with the
// alphas kept on the simplex through a softmax parameterization. Initial
// step 0.1, decayed by 0.9 per epoch; stops at relative objective change
// below 1e-6 or after 100 epochs.
std::vector<double> learn_alphas(const EnsembleSpec& ensemble,
                                 const Corpus& labelled);

// Objective value of learn_alphas for fixed alphas: mean over tokens of
// -log pooled probability of the gold substructure.
double pool_kl(const EnsembleSpec& ensemble, const std::vector<double>& alphas,
               const Corpus& labelled);

std::string alphas_to_json(const std::vector<double>& alphas);
std::vector<double> alphas_from_json(const std::string& text);

}  // namespace xfer

#endif
