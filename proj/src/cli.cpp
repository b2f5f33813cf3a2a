#include "adasparse/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "adasparse/data.hpp"
#include "adasparse/metrics.hpp"
#include "adasparse/textio.hpp"

namespace fs = std::filesystem;

namespace adasparse {

namespace {

void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw IoError("--out directory is required");
  fs::create_directories(out_dir);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw IoError(std::string(what) + " not found: " + path);
  }
}

std::string sanitize_key(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), ':', '_');
  return out;
}

CsvSchema schema_next_to(const std::string& data_path) {
  const fs::path dir = fs::path(data_path).parent_path();
  const std::string schema_path = (dir / "schema.txt").string();
  require_file(schema_path, "schema file");
  return load_schema(schema_path);
}

}  // namespace

int cmd_gen_data(const GenDataArgs& args) {
  require_file(args.spec_path, "dataset spec");
  const DatasetSpec spec = load_dataset_spec(args.spec_path);
  ensure_out_dir(args.out_dir);

  const std::vector<Sample> samples = generate_synthetic(spec, args.seed);
  const Split split = split_by_timestamp(samples);
  const Vocabulary vocab = identity_vocabulary(spec);
  const CsvSchema schema{vocab.domain_fields(), vocab.agnostic_fields()};

  const fs::path out(args.out_dir);
  write_csv((out / "train.csv").string(), schema, split.train, vocab);
  write_csv((out / "dev.csv").string(), schema, split.dev, vocab);
  write_csv((out / "test.csv").string(), schema, split.test, vocab);
  save_schema(schema, (out / "schema.txt").string());

  std::ostringstream echo;
  echo << "command=gen-data\n"
       << "spec=" << args.spec_path << "\n"
       << "seed=" << args.seed << "\n"
       << read_file(args.spec_path);
  write_file((out / "effective_config.txt").string(), echo.str());

  std::cout << "generated " << samples.size() << " samples over "
            << spec.domain_count() << " domains: train=" << split.train.size()
            << " dev=" << split.dev.size() << " test=" << split.test.size() << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  require_file(args.data_dir, "data directory");
  const fs::path data(args.data_dir);
  require_file((data / "schema.txt").string(), "schema file");
  require_file((data / "train.csv").string(), "training data");
  require_file((data / "dev.csv").string(), "dev data");
  ensure_out_dir(args.out_dir);

  const CsvSchema schema = load_schema((data / "schema.txt").string());
  Vocabulary vocab(schema.domain_fields, schema.agnostic_fields);
  LoadReport train_report, dev_report;
  const auto train_set =
      load_csv((data / "train.csv").string(), schema, vocab, true, &train_report);
  const auto dev_set =
      load_csv((data / "dev.csv").string(), schema, vocab, false, &dev_report);
  if (train_report.malformed_rows || dev_report.malformed_rows) {
    std::cerr << "warning: skipped " << train_report.malformed_rows << " train / "
              << dev_report.malformed_rows << " dev malformed rows\n";
  }

  const fs::path out(args.out_dir);
  write_file((out / "effective_config.txt").string(), format_train_config(args.config));

  const TrainResult result = train(args.config, train_set, dev_set, vocab);
  save_checkpoint(result.best, (out / "checkpoint.ckpt").string());
  save_checkpoint(result.final_, (out / "checkpoint_final.ckpt").string());
  write_file((out / "history.csv").string(), format_step_history(result.history));
  write_file((out / "epochs.csv").string(), format_epoch_history(result.history));

  std::cout << "trained " << result.final_.steps_done << " steps over "
            << result.history.epochs.size() << " epochs\n";
  for (const EpochRecord& e : result.history.epochs) {
    std::cout << "epoch " << e.epoch << ": train_loss=" << e.train_loss
              << " dev_logloss=" << e.dev_logloss << " dev_auc=" << e.dev_auc
              << " dev_gauc=" << e.dev_gauc << "\n";
  }
  std::cout << "best checkpoint: " << (out / "checkpoint.ckpt").string() << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  require_file(args.checkpoint, "checkpoint");
  require_file(args.data_path, "data file");
  ensure_out_dir(args.out_dir);

  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const CsvSchema schema = schema_next_to(args.data_path);
  Vocabulary vocab = ckpt.model.vocab;
  LoadReport report;
  const auto samples = load_csv(args.data_path, schema, vocab, false, &report);
  if (report.malformed_rows) {
    std::cerr << "warning: skipped " << report.malformed_rows << " malformed rows\n";
  }

  const EvalReport eval = evaluate(ckpt.model, ckpt.alpha, samples);
  const std::string text = report_text(eval);
  std::cout << text;

  const fs::path out(args.out_dir);
  write_file((out / "report.txt").string(), text);
  write_file((out / "report.json").string(), report_json(eval));
  std::ostringstream echo;
  echo << "command=eval\ncheckpoint=" << args.checkpoint << "\ndata=" << args.data_path
       << "\n";
  write_file((out / "effective_config.txt").string(), echo.str());
  return 0;
}

int cmd_inspect_masks(const InspectArgs& args) {
  require_file(args.checkpoint, "checkpoint");
  require_file(args.data_path, "data file");
  if (args.domains.empty()) throw SpecError("inspect-masks: give at least one --domains id");
  ensure_out_dir(args.out_dir);

  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const CsvSchema schema = schema_next_to(args.data_path);
  Vocabulary vocab = ckpt.model.vocab;
  const auto samples = load_csv(args.data_path, schema, vocab, false);
  const auto parts = partition_by_domain(samples);

  std::vector<std::string> available;
  for (const auto& [key, idx] : parts) available.push_back(key);

  std::vector<std::pair<std::string, DomainMask>> masks;
  for (const std::string& key : args.domains) {
    auto it = parts.find(key);
    if (it == parts.end()) {
      throw SpecError("unknown domain id '" + key + "'; available: " +
                      join(available, ' '));
    }
    std::vector<Sample> subset;
    subset.reserve(it->second.size());
    for (std::size_t i : it->second) subset.push_back(samples[i]);
    masks.emplace_back(key, domain_mask(ckpt.model, ckpt.alpha, subset));
  }

  const fs::path out(args.out_dir);
  for (const auto& [key, mask] : masks) {
    std::ostringstream csv;
    for (std::size_t l = 0; l < mask.layers.size(); ++l) {
      csv << l;
      for (auto bit : mask.layers[l]) csv << ',' << static_cast<int>(bit);
      csv << "\n";
    }
    write_file((out / ("mask_" + sanitize_key(key) + ".csv")).string(), csv.str());
  }

  std::ostringstream jaccard_csv;
  jaccard_csv << "domain_a,domain_b,layer,jaccard\n";
  const std::size_t layers = masks.empty() ? 0 : masks.front().second.layers.size();
  const std::size_t last = layers ? layers - 1 : 0;
  for (std::size_t a = 0; a < masks.size(); ++a) {
    for (std::size_t b = a + 1; b < masks.size(); ++b) {
      for (std::size_t l = 0; l < layers; ++l) {
        const double j = mask_jaccard(masks[a].second, masks[b].second, l);
        jaccard_csv << masks[a].first << ',' << masks[b].first << ',' << l << ','
                    << fmt_double(j) << "\n";
        if (l == last) {
          std::cout << "jaccard(" << masks[a].first << ", " << masks[b].first
                    << ") @ last layer = " << j << "\n";
        }
      }
    }
  }
  write_file((out / "jaccard.csv").string(), jaccard_csv.str());

  std::ostringstream echo;
  echo << "command=inspect-masks\ncheckpoint=" << args.checkpoint
       << "\ndata=" << args.data_path << "\ndomains=" << join(args.domains, ',') << "\n";
  write_file((out / "effective_config.txt").string(), echo.str());
  return 0;
}

namespace {

struct CliApp {
  CLI::App app{"AdaSparse: multi-domain CTR models with domain-adaptive neuron pruning"};
  CliState state;
  std::string method = "fusion";
  std::string hidden = "128,64,32";
  std::string domains;
  std::string config_path;

  CliApp() {
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multi-domain dataset");
    gen->add_option("--config", config_path, "Flat key=value config file");
    gen->add_option("--spec", state.gen.spec_path, "Dataset spec file (key=value)");
    gen->add_option("--seed", state.gen.seed, "Generator seed");
    gen->add_option("--out", state.gen.out_dir, "Output directory");

    // Train options land in a scratch config; finish() layers defaults,
    // then the --config file, then explicit flags.
    auto* tr = app.add_subcommand("train", "Train a model on a generated data directory");
    tr->add_option("--data", state.train.data_dir, "Directory with train/dev CSVs");
    tr->add_option("--out", state.train.out_dir, "Output directory");
    tr->add_option("--config", config_path, "Flat key=value config file");
    tr->add_option("--method", method, "none|binarization|scaling|fusion")
        ->check(CLI::IsMember({"none", "binarization", "scaling", "fusion"}));
    tr->add_option("--hidden", hidden, "Hidden sizes, e.g. 128,64,32");
    tr->add_option("--embed-dim", flags.embed_dim, "Embedding dimension");
    tr->add_option("--r-min", flags.r_min, "Sparsity boundary lower edge");
    tr->add_option("--r-max", flags.r_max, "Sparsity boundary upper edge");
    tr->add_option("--beta", flags.beta, "Scaling/fusion beta (>= 1)");
    tr->add_option("--epsilon", flags.epsilon, "Soft-threshold epsilon");
    tr->add_option("--alpha-init", flags.alpha_init, "Initial sigmoid sharpness");
    tr->add_option("--alpha-max", flags.alpha_max, "Final sigmoid sharpness");
    tr->add_option("--lambda-init", flags.lambda_init, "Initial sparsity-loss weight");
    tr->add_option("--lambda-cap", flags.lambda_cap, "Final sparsity-loss weight");
    tr->add_option("--lr", flags.lr, "Adam learning rate");
    tr->add_option("--batch-size", flags.batch_size, "Mini-batch size");
    tr->add_option("--epochs", flags.epochs, "Training epochs");
    tr->add_option("--seed", flags.seed, "Training seed");
    tr->add_option("--schedule-steps", flags.schedule_steps,
                   "Steps to reach the schedule caps (0: full run)");

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV file");
    ev->add_option("--config", config_path, "Flat key=value config file");
    ev->add_option("--checkpoint", state.eval.checkpoint, "Checkpoint path");
    ev->add_option("--data", state.eval.data_path, "CSV file (schema.txt beside it)");
    ev->add_option("--out", state.eval.out_dir, "Output directory");

    auto* in = app.add_subcommand("inspect-masks",
                                  "Export learned per-domain masks and their overlaps");
    in->add_option("--config", config_path, "Flat key=value config file");
    in->add_option("--checkpoint", state.inspect.checkpoint, "Checkpoint path");
    in->add_option("--data", state.inspect.data_path, "CSV file (schema.txt beside it)");
    in->add_option("--domains", domains, "Comma-separated domain ids");
    in->add_option("--out", state.inspect.out_dir, "Output directory");
  }

  CliState finish() {
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    state.command = sub->get_name();

    // Layering: defaults, then the config file, then explicit flags. A key
    // in the file is ignored when the matching flag was given.
    KvPairs file_pairs;
    if (!config_path.empty()) file_pairs = parse_kv_file(config_path);
    const auto used = [&](const char* flag) { return sub->count(flag) > 0; };
    auto take_string = [&](const std::string& key, const char* flag, std::string& into,
                           const std::string& value) {
      if (key != std::string(flag).substr(2)) return false;
      if (!used(flag)) into = value;
      return true;
    };

    if (state.command == "gen-data") {
      for (const auto& [key, value] : file_pairs) {
        if (take_string(key, "--spec", state.gen.spec_path, value)) continue;
        if (take_string(key, "--out", state.gen.out_dir, value)) continue;
        if (key == "seed") {
          if (!used("--seed")) {
            state.gen.seed = static_cast<std::uint64_t>(parse_int(value, key));
          }
          continue;
        }
        throw SpecError("gen-data config: unknown key '" + key + "'");
      }
      if (state.gen.spec_path.empty()) throw SpecError("gen-data: --spec is required");
      if (state.gen.out_dir.empty()) throw SpecError("gen-data: --out is required");
    } else if (state.command == "train") {
      TrainConfig config;
      KvPairs hyper;
      for (const auto& [key, value] : file_pairs) {
        if (take_string(key, "--data", state.train.data_dir, value)) continue;
        if (take_string(key, "--out", state.train.out_dir, value)) continue;
        hyper.emplace_back(key, value);
      }
      apply_train_config_pairs(config, hyper);
      if (used("--method")) config.method = pruner_mode_from_string(method);
      if (used("--hidden")) config.hidden_sizes = parse_int_list(hidden, "hidden");
      if (used("--embed-dim")) config.embed_dim = flags.embed_dim;
      if (used("--r-min")) config.r_min = flags.r_min;
      if (used("--r-max")) config.r_max = flags.r_max;
      if (used("--beta")) config.beta = flags.beta;
      if (used("--epsilon")) config.epsilon = flags.epsilon;
      if (used("--alpha-init")) config.alpha_init = flags.alpha_init;
      if (used("--alpha-max")) config.alpha_max = flags.alpha_max;
      if (used("--lambda-init")) config.lambda_init = flags.lambda_init;
      if (used("--lambda-cap")) config.lambda_cap = flags.lambda_cap;
      if (used("--lr")) config.lr = flags.lr;
      if (used("--batch-size")) config.batch_size = flags.batch_size;
      if (used("--epochs")) config.epochs = flags.epochs;
      if (used("--seed")) config.seed = flags.seed;
      if (used("--schedule-steps")) config.schedule_steps = flags.schedule_steps;
      config.validate();
      state.train.config = config;
      if (state.train.data_dir.empty()) throw SpecError("train: --data is required");
      if (state.train.out_dir.empty()) throw SpecError("train: --out is required");
    } else if (state.command == "eval") {
      for (const auto& [key, value] : file_pairs) {
        if (take_string(key, "--checkpoint", state.eval.checkpoint, value)) continue;
        if (take_string(key, "--data", state.eval.data_path, value)) continue;
        if (take_string(key, "--out", state.eval.out_dir, value)) continue;
        throw SpecError("eval config: unknown key '" + key + "'");
      }
      if (state.eval.checkpoint.empty()) throw SpecError("eval: --checkpoint is required");
      if (state.eval.data_path.empty()) throw SpecError("eval: --data is required");
      if (state.eval.out_dir.empty()) throw SpecError("eval: --out is required");
    } else if (state.command == "inspect-masks") {
      for (const auto& [key, value] : file_pairs) {
        if (take_string(key, "--checkpoint", state.inspect.checkpoint, value)) continue;
        if (take_string(key, "--data", state.inspect.data_path, value)) continue;
        if (take_string(key, "--out", state.inspect.out_dir, value)) continue;
        if (take_string(key, "--domains", domains, value)) continue;
        throw SpecError("inspect-masks config: unknown key '" + key + "'");
      }
      for (const auto& d : split(domains, ',')) {
        if (!d.empty()) state.inspect.domains.push_back(d);
      }
      if (state.inspect.checkpoint.empty()) {
        throw SpecError("inspect-masks: --checkpoint is required");
      }
      if (state.inspect.data_path.empty()) throw SpecError("inspect-masks: --data is required");
      if (state.inspect.domains.empty()) throw SpecError("inspect-masks: --domains is required");
      if (state.inspect.out_dir.empty()) throw SpecError("inspect-masks: --out is required");
    }
    return state;
  }

 private:
  TrainConfig flags;  // scratch landing zone for parsed train flags
};

int dispatch(const CliState& state) {
  if (state.command == "gen-data") return cmd_gen_data(state.gen);
  if (state.command == "train") return cmd_train(state.train);
  if (state.command == "eval") return cmd_eval(state.eval);
  if (state.command == "inspect-masks") return cmd_inspect_masks(state.inspect);
  throw SpecError("unknown command");
}

}  // namespace

CliState parse_cli(const std::vector<std::string>& args) {
  CliApp cli;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    throw SpecError(std::string("invalid command line: ") + e.what());
  }
  return cli.finish();
}

int run_cli(int argc, const char* const* argv) {
  CliApp cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.app.exit(e);
  }
  try {
    return dispatch(cli.finish());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace adasparse
