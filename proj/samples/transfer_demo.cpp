// Trains two tiny tokenizers, builds a subword-mean space from the source
// side and initializes the target embeddings with FOCUS and WECHSEL.

#include <iostream>
#include <string>
#include <vector>

#include "vocadapt.hpp"

using namespace vocadapt;

int main() {
    const std::vector<std::string> source_text = {
        "the cat sat on the mat and the dog sat on the log",
        "a cat and a dog are friends on the farm",
    };
    const std::vector<std::string> target_text = {
        "mačka sedi na preprogi in pes sedi na hlodu",
        "mačka in pes sta prijatelja na kmetiji",
    };
    bpe::BpeTrainConfig cfg;
    cfg.vocab_size = 320;
    const auto src_tok = bpe::train_bpe(source_text, cfg);
    const auto tgt_tok = bpe::train_bpe(target_text, cfg);

    const auto src_emb = transfer::random_init(src_tok.vocab(), 8, /*seed=*/7, 0.0, 0.02);
    space::AuxiliaryEncoder aux(src_tok, src_emb);
    space::SubwordMeanProvider provider(aux);
    const auto scheme = MarkerScheme::sentencepiece();
    const auto ws = space::build_common_space(src_tok.vocab(), provider, scheme);
    const auto wt = space::build_common_space(tgt_tok.vocab(), provider, scheme);

    transfer::TransferConfig tcfg;
    tcfg.seed = 7;
    const auto focus = transfer::focus_transfer(src_emb, wt, tcfg);
    const auto wechsel = transfer::wechsel_transfer(src_emb, ws, wt, tcfg);

    std::cout << "source vocab " << src_tok.size() << ", target vocab " << tgt_tok.size() << "\n";
    std::cout << "focus: overlap " << focus.report.overlap_size << ", transferred " << focus.report.transferred
              << ", fallback " << focus.report.fallback_count << "\n";
    std::cout << "wechsel: transferred " << wechsel.report.transferred << ", mean top similarity "
              << wechsel.report.mean_top_similarity << "\n";

    const auto ids = tgt_tok.encode("mačka sedi");
    std::cout << "'mačka sedi' ->";
    for (auto id : ids) std::cout << ' ' << tgt_tok.token(id);
    std::cout << "\n";
}
