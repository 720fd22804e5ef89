// scramble: treebank augmentation by argument scrambling, and the parser
// pipeline around it.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scramble/eval.h"
#include "scramble/ngram.h"
#include "scramble/parallel.h"
#include "scramble/parser.h"
#include "scramble/projective.h"
#include "scramble/scramble.h"
#include "scramble/synthetic.h"
#include "scramble/treebank.h"

using namespace scramble;

namespace {

struct Common {
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string config;
  std::vector<std::string> sets;
  std::string command_line;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SCRAMBLE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error("cli", std::string("SCRAMBLE_SEED is not a number: ") + env);
    }
  }
  return 42;
}

void echo(const std::string& key, const std::string& value) {
  std::cerr << "# " << key << " = " << value << "\n";
}

ParserConfig resolve_config(const Common& c) {
  ParserConfig cfg;
  if (!c.config.empty()) cfg = ParserConfig::from_map(read_key_values(c.config));
  for (const auto& kv : c.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("cli", "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.seed = c.seed;
  for (const auto& [k, v] : cfg.to_map()) echo(k, v);
  return cfg;
}

void write_treebank(const std::string& path, const Treebank& tb, const Common& c) {
  std::string text = "# generated_by = " + c.command_line + "\n" + write_conllu(tb);
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "cannot write " + path);
  out << text;
}

Treebank read_treebank(const std::string& path) {
  Diagnostics diag;
  Treebank tb = read_conllu_file(path, &diag);
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
  return tb;
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string order_row_name(OrderLabel l) {
  std::string name = to_string(l), out;
  for (char ch : name) {
    if (!out.empty()) out += ' ';
    out += ch;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-order augmentation and neural dependency parsing for treebanks"};
  app.require_subcommand(1);

  Common common;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) common.command_line += ' ';
    common.command_line += argv[i];
  }
  try {
    common.seed = default_seed();
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  auto add_common = [&](CLI::App* sub, bool trainer) {
    sub->add_option("--seed", common.seed, "Random seed (default 42 or $SCRAMBLE_SEED)");
    sub->add_option("--jobs", common.jobs, "Worker threads for sentence-level work")
        ->check(CLI::PositiveNumber);
    if (trainer) {
      sub->add_option("--config", common.config, "key = value hyperparameter file")
          ->check(CLI::ExistingFile);
      sub->add_option("--set", common.sets, "Override one hyperparameter, key=value");
    }
  };

  std::string in, out, mapping_name = "ud", lm_path, model_path, train_path, dev_path, gold_path,
                       pred_path, orders = "sov=1.0", sizes_text = "200,400,800,1600";
  int n = kDefaultRepresentativeCount, order = 3, budget = 9000, k = 0, lm_limit = 720;
  int gen_n = 2000;
  bool keep_identity = false, json = false, with_punct = false, text_corpus = false,
       score_tags = false;

  auto* stats = app.add_subcommand("stats", "Word-order distribution and non-projectivity");
  stats->add_option("--in", in, "CoNLL-U treebank")->required();
  stats->add_option("--mapping", mapping_name, "Label preset: ud or pg");
  add_common(stats, false);

  auto* proj = app.add_subcommand("projectivize", "Lift non-projective arcs (head+path labels)");
  proj->add_option("--in", in)->required();
  proj->add_option("--out", out, "Output path, '-' for stdout");
  add_common(proj, false);

  auto* deproj = app.add_subcommand("deproj", "Undo pseudo-projective lifting");
  deproj->add_option("--in", in)->required();
  deproj->add_option("--out", out);
  add_common(deproj, false);

  auto* select = app.add_subcommand("select", "Seeded representative subset");
  select->add_option("--in", in)->required();
  select->add_option("--out", out);
  select->add_option("--n", n, "Subset size")->check(CLI::NonNegativeNumber);
  add_common(select, false);

  auto* train_lm = app.add_subcommand("train-lm", "Witten-Bell n-gram language model");
  train_lm->add_option("--in", in, "CoNLL-U treebank, or plain text with --text")->required();
  train_lm->add_flag("--text", text_corpus, "Input is whitespace-tokenized text");
  train_lm->add_option("--order", order)->check(CLI::Range(1, 5));
  train_lm->add_option("--out", out)->required();
  add_common(train_lm, false);

  auto* permute = app.add_subcommand("permute", "Scramble verbal projections into new trees");
  permute->add_option("--in", in)->required();
  permute->add_option("--lm", lm_path)->required();
  permute->add_option("--out", out);
  permute->add_option("--budget", budget, "Maximum augmented trees")
      ->check(CLI::NonNegativeNumber);
  permute->add_option("--k", k, "Survivors per projection (default: its unit count)")
      ->check(CLI::NonNegativeNumber);
  permute->add_option("--limit", lm_limit, "Sampled orderings for more than 5 units")
      ->check(CLI::PositiveNumber);
  permute->add_option("--mapping", mapping_name);
  permute->add_flag("--keep-identity", keep_identity, "Keep the unpermuted ordering");
  add_common(permute, false);

  auto* train = app.add_subcommand("train", "Train the parser");
  train->add_option("--train", train_path)->required();
  train->add_option("--dev", dev_path);
  train->add_option("--out", out)->required();
  add_common(train, true);

  auto* train_tagger_cmd = app.add_subcommand("train-tagger", "Train the POS tagger");
  train_tagger_cmd->add_option("--train", train_path)->required();
  train_tagger_cmd->add_option("--dev", dev_path);
  train_tagger_cmd->add_option("--out", out)->required();
  add_common(train_tagger_cmd, true);

  auto* parse = app.add_subcommand("parse", "Parse a CoNLL-U file (forms and UPOS are read)");
  parse->add_option("--model", model_path)->required();
  parse->add_option("--in", in)->required();
  parse->add_option("--out", out);
  add_common(parse, false);

  auto* tag = app.add_subcommand("tag", "Fill the UPOS column");
  tag->add_option("--model", model_path)->required();
  tag->add_option("--in", in)->required();
  tag->add_option("--out", out);
  add_common(tag, false);

  auto* eval = app.add_subcommand("eval", "LAS/UAS overall and by word order");
  eval->add_option("--gold", gold_path)->required();
  eval->add_option("--pred", pred_path)->required();
  eval->add_option("--mapping", mapping_name);
  eval->add_flag("--with-punct", with_punct, "Score punctuation too");
  eval->add_flag("--pos", score_tags, "Also report UPOS accuracy of the prediction");
  eval->add_flag("--json", json, "One-line JSON record");
  add_common(eval, false);

  auto* curve = app.add_subcommand("curve", "Learning curve over nested training subsets");
  curve->add_option("--train", train_path)->required();
  curve->add_option("--dev", dev_path)->required();
  curve->add_option("--sizes", sizes_text, "Comma-separated, increasing");
  add_common(curve, true);

  auto* gen = app.add_subcommand("gen-synthetic", "Sample clauses from a toy Hindi-like grammar");
  gen->add_option("--n", gen_n)->check(CLI::NonNegativeNumber);
  gen->add_option("--orders", orders, "e.g. sov=0.9,osv=0.1");
  gen->add_option("--out", out);
  add_common(gen, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    echo("command", common.command_line);
    echo("seed", std::to_string(common.seed));
    echo("jobs", std::to_string(common.jobs));

    if (*stats) {
      Treebank tb = read_treebank(in);
      DeprelMapping m = DeprelMapping::preset(mapping_name);
      auto counts = order_counts(tb, m);
      int transitive = 0;
      for (auto l : kTransitiveOrders) transitive += counts[l];
      std::cout << "Order\tPercentage\n";
      if (transitive > 0) {
        auto dist = order_distribution(tb, m);
        for (auto l : kTransitiveOrders) std::cout << order_row_name(l) << "\t" << pct(dist[l]) << "\n";
      }
      std::cout << "sentences\t" << tb.size() << "\n";
      std::cout << "transitive\t" << transitive << "\n";
      std::cout << "skew\t" << pct(order_skew(counts)) << "\n";
      if (!tb.empty()) std::cout << "nonprojective_arcs\t" << pct(100.0 * nonprojective_arc_ratio(tb)) << "\n";
    } else if (*proj) {
      int lifts = 0;
      Treebank tb = projectivize_treebank(read_treebank(in), &lifts);
      std::cerr << "lifted " << lifts << " arcs\n";
      write_treebank(out, tb, common);
    } else if (*deproj) {
      Diagnostics diag;
      Treebank tb = deprojectivize_treebank(read_treebank(in), &diag);
      for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
      write_treebank(out, tb, common);
    } else if (*select) {
      Diagnostics diag;
      Treebank tb = select_representative(read_treebank(in), n, common.seed, &diag);
      for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
      write_treebank(out, tb, common);
    } else if (*train_lm) {
      std::vector<std::vector<std::string>> corpus;
      if (text_corpus) {
        corpus = read_token_corpus(in);
      } else {
        for (const auto& t : read_treebank(in).trees) corpus.push_back(t.forms());
      }
      NGramModel lm = NGramModel::train(corpus, order);
      lm.provenance = common.command_line;
      lm.save(out);
      std::cerr << "vocabulary " << lm.vocab_size() << ", " << corpus.size() << " sentences\n";
    } else if (*permute) {
      Treebank tb = read_treebank(in);
      NGramModel lm = NGramModel::load(lm_path);
      AugmentOptions opt;
      opt.budget = budget;
      if (k > 0) opt.k = k;
      opt.permutation_limit = lm_limit;
      opt.keep_identity = keep_identity;
      opt.seed = common.seed;
      AugmentStats st;
      Treebank aug = augment(tb, lm, DeprelMapping::preset(mapping_name), opt, &st, common.jobs);
      std::cerr << "sentences " << st.sentences << ", lifted " << st.lifted_arcs
                << ", projections " << st.projections << ", generated " << st.generated
                << ", after filter " << st.filtered << ", kept " << st.kept << "\n";
      write_treebank(out, aug, common);
    } else if (*train || *train_tagger_cmd) {
      ParserConfig cfg = resolve_config(common);
      Treebank tr = read_treebank(train_path);
      Treebank dv = dev_path.empty() ? Treebank{} : read_treebank(dev_path);
      auto log = [](const EpochLog& l) {
        std::cerr << "epoch " << l.epoch << " loss " << l.loss;
        if (l.dev_las >= 0) std::cerr << " dev " << pct(l.dev_las);
        std::cerr << "\n";
      };
      if (*train) {
        if (cfg.pseudo_projective) tr = projectivize_treebank(tr);
        train_parser(tr, dv, cfg, log).save(out, common.command_line);
      } else {
        train_tagger(tr, dv, cfg, log).save(out, common.command_line);
      }
    } else if (*parse) {
      ParserModel model = ParserModel::load(model_path);
      write_treebank(out, parse_batch(model, read_treebank(in), common.jobs), common);
    } else if (*tag) {
      TaggerModel model = TaggerModel::load(model_path);
      Treebank tb = read_treebank(in);
      for (auto& t : tb.trees) {
        auto tags = model.tag(t.forms());
        for (int i = 1; i <= t.size(); ++i) t.token(i).upos = tags[i - 1];
      }
      write_treebank(out, tb, common);
    } else if (*eval) {
      Treebank g = read_treebank(gold_path);
      Treebank p = read_treebank(pred_path);
      const bool exclude = !with_punct;
      ParseScore overall = score_counts(g, p, exclude, common.jobs).to_score(exclude);
      auto by_order = score_by_order(g, p, DeprelMapping::preset(mapping_name), exclude);
      double pos = 0;
      if (score_tags) {
        std::vector<std::vector<std::string>> tags;
        for (const auto& t : p.trees) tags.push_back(t.upos_tags());
        pos = pos_accuracy(g, tags);
      }
      const double* pos_ptr = score_tags ? &pos : nullptr;
      std::cout << (json ? evaluation_record(overall, by_order, pos_ptr) + "\n"
                         : evaluation_table(overall, by_order, pos_ptr));
    } else if (*curve) {
      ParserConfig cfg = resolve_config(common);
      std::vector<int> sizes;
      std::stringstream ss(sizes_text);
      std::string item;
      while (std::getline(ss, item, ',')) sizes.push_back(std::stoi(item));
      auto c = learning_curve(read_treebank(train_path), read_treebank(dev_path), sizes, cfg);
      std::cout << format_curve(c);
    } else if (*gen) {
      SyntheticGrammar g = SyntheticGrammar::hindi_like();
      g.set_orders(orders);
      echo("orders", orders);
      write_treebank(out, gen_synthetic(g, gen_n, common.seed), common);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "cli: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
