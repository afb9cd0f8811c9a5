#include "maha/synth.hpp"

#include "maha/base64.hpp"
#include "maha/errors.hpp"

namespace maha {

namespace {

const std::vector<std::string>& vocab() {
    static const std::vector<std::string> words = {
        "alpha",  "bridge", "candle", "delta",  "ember",  "fjord",  "garnet", "harbor",
        "indigo", "juniper", "kernel", "lagoon", "meadow", "nectar", "onyx",   "prairie",
        "quartz", "raven",  "saffron", "tundra", "umber",  "velvet", "willow", "zephyr",
    };
    return words;
}

std::string random_word(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, vocab().size() - 1);
    return vocab()[pick(rng)];
}

std::string random_sentence(std::mt19937_64& rng, int words, bool allow_capitals) {
    std::string out;
    std::uniform_int_distribution<int> cap(0, 9);
    for (int i = 0; i < words; ++i) {
        std::string w = random_word(rng);
        if (allow_capitals && cap(rng) == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    out.push_back('.');
    return out;
}

} // namespace

SourceDocument random_source_document(std::mt19937_64& rng, const std::string& doc_id,
                                      const RandomDocOptions& options) {
    SourceDocument doc;
    doc.doc_id = doc_id;
    doc.title = "synthetic " + doc_id;

    std::uniform_int_distribution<int> n_extra(options.min_extra_blocks, options.max_extra_blocks);
    std::uniform_int_distribution<int> kind_pick(0, 5);
    std::uniform_int_distribution<int> words(4, 14);
    std::uniform_int_distribution<int> dim_pick(1, 3);
    std::uniform_int_distribution<int> byte_pick(0, 255);

    SourceBlock first;
    first.kind = BlockKind::paragraph;
    first.text = random_sentence(rng, words(rng), true);
    doc.blocks.push_back(std::move(first));

    const int extra = n_extra(rng);
    for (int i = 0; i < extra; ++i) {
        SourceBlock b;
        switch (kind_pick(rng)) {
        case 0:
        case 1:
            b.kind = BlockKind::paragraph;
            b.text = random_sentence(rng, words(rng), true);
            break;
        case 2:
            b.kind = BlockKind::heading;
            b.text = random_word(rng) + " " + random_word(rng);
            break;
        case 3: {
            b.kind = BlockKind::table;
            const int rows = dim_pick(rng);
            const int cols = dim_pick(rng);
            for (int r = 0; r < rows; ++r) {
                std::vector<std::string> row;
                for (int c = 0; c < cols; ++c) row.push_back(random_word(rng));
                b.rows.push_back(std::move(row));
            }
            break;
        }
        case 4: {
            b.kind = rng() % 2 == 0 ? BlockKind::image : BlockKind::graph;
            std::string bytes;
            for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<char>(byte_pick(rng)));
            b.data = base64_encode(bytes);
            b.text = random_word(rng) + " " + random_word(rng);
            break;
        }
        case 5:
            b.kind = BlockKind::equation;
            b.text = "\\" + random_word(rng) + "_{" + std::to_string(i) + "} = \\" +
                     random_word(rng) + "^{2}";
            break;
        }
        doc.blocks.push_back(std::move(b));
    }
    return doc;
}

std::string random_query(std::mt19937_64& rng, int n_tokens) {
    std::string out;
    for (int i = 0; i < n_tokens; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += random_word(rng);
    }
    return out;
}

namespace {

const std::vector<std::string>& entity_bases() {
    static const std::vector<std::string> names = {"Zenith", "Orbit", "Quanta", "Helix",
                                                   "Vertex", "Nimbus", "Stratus", "Apex"};
    return names;
}

std::string topic_token(int item, int slot) {
    static const char* kinds[] = {"metric", "trend", "factor"};
    return std::string(kinds[slot]) + std::to_string(item);
}

} // namespace

AblationSuite make_ablation_suite(const AblationOptions& options) {
    if (options.items_per_modality <= 0) {
        throw invalid_argument_error("items_per_modality must be positive");
    }
    AblationSuite suite;
    suite.dataset_id = "ablation-crossmodal";

    const Modality patterns[] = {Modality::table, Modality::image, Modality::equation};
    int item = 0;
    for (Modality pattern : patterns) {
        for (int i = 0; i < options.items_per_modality; ++i, ++item) {
            const std::string doc_id =
                "abl" + std::string(item < 10 ? "0" : "") + std::to_string(item);
            const std::string entity_name =
                entity_bases()[static_cast<std::size_t>(item) % entity_bases().size()] +
                std::to_string(item);
            const std::string t0 = topic_token(item, 0);
            const std::string t1 = topic_token(item, 1);
            const std::string t2 = topic_token(item, 2);

            const std::string key_sentence = entity_name + " Group reported that " + t0 + " " +
                                             t1 + " " + t2 +
                                             " improved during the latest cycle.";

            SourceDocument doc;
            doc.doc_id = doc_id;
            doc.title = entity_name + " Group briefing";

            SourceBlock anchor;
            anchor.kind = BlockKind::paragraph;
            anchor.text = key_sentence + " general overall update review for the period.";
            doc.blocks.push_back(std::move(anchor));

            SourceBlock extra;
            switch (pattern) {
            case Modality::table: {
                extra.kind = BlockKind::table;
                for (int r = 0; r < 2; ++r) {
                    std::vector<std::string> row;
                    for (int c = 0; c < 2; ++c) {
                        row.push_back("datum" + std::to_string(item) + "r" + std::to_string(r) +
                                      "c" + std::to_string(c));
                    }
                    extra.rows.push_back(std::move(row));
                }
                break;
            }
            case Modality::image: {
                extra.kind = BlockKind::image;
                extra.data = base64_encode("img-payload-" + std::to_string(item));
                extra.text = "figure datum" + std::to_string(item) + " series view";
                break;
            }
            case Modality::equation: {
                extra.kind = BlockKind::equation;
                extra.text = "\\gamma_{" + std::to_string(item) + "} = \\delta_{" +
                             std::to_string(item) + "} \\cdot \\rho";
                break;
            }
            default:
                break;
            }
            doc.blocks.push_back(std::move(extra));
            suite.documents.push_back(std::move(doc));

            QAItem qa;
            qa.query_id = "q" + std::to_string(item);
            const bool entity_form = item % 2 == 0;
            if (entity_form) {
                qa.question = "What did " + entity_name + " Group say regarding " + t0 + " " +
                              t1 + " " + t2 + " during this cycle review";
            } else {
                qa.question = "how did the " + t0 + " " + t1 + " " + t2 +
                              " numbers shift in the recent cycle review";
            }
            qa.gold_chunk_ids = {doc_id + ":0000", doc_id + ":0001"};
            qa.gold_answer = key_sentence;
            qa.required_modalities = {Modality::text, pattern};
            suite.items.push_back(std::move(qa));
        }
    }

    for (int j = 0; j < options.text_distractors; ++j) {
        SourceDocument doc;
        doc.doc_id = "dis" + std::string(j < 10 ? "0" : "") + std::to_string(j);
        doc.title = "planning note " + std::to_string(j);
        SourceBlock b;
        b.kind = BlockKind::paragraph;
        b.text = "the planning team noted a steady outcome" + std::to_string(j) +
                 " during the latest cycle. general overall update review for the period.";
        doc.blocks.push_back(std::move(b));
        suite.documents.push_back(std::move(doc));
    }

    return suite;
}

} // namespace maha
