# ================== MAIN CLI ==================
"""
Komut satırı - veri istatistikleri, eğitim, değerlendirme ve deney protokolleri

    python main.py stats <path> | --counts I J E
    python main.py train --config <path>
    python main.py eval --checkpoint <path>
    python main.py experiment --protocol <name> --config <path>

Çıkış kodları: 0 başarı, 1 kullanım/konfigürasyon, 2 girdi, 3 sayısal hata
"""

import argparse
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from config.settings import PROTOCOLS, TOP_KS, load_run_config
from evaluation.experiments import run_protocol
from evaluation.protocols import rank_metrics
from evaluation.reports import ReportRow, format_table, write_report
from graph.interactions import DatasetStats, load_graph, split
from training.checkpoint import load_checkpoint, save_checkpoint
from training.trainer import train
from utils.errors import (ConfigurationError, ContractViolation, InputError, NoiseInjectionError,
                          NumericError, RecommenderError, TrainingAborted)
from utils.helpers import fmt_sci, log

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class CliParser(argparse.ArgumentParser):
    """Kullanım hatalarında 1 koduyla çık"""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: hata: {message}\n")
        sys.exit(EXIT_USAGE)


def _print_stats(stats: DatasetStats) -> None:
    print(f"users\t{stats.n_users}")
    print(f"items\t{stats.n_items}")
    print(f"interactions\t{stats.n_interactions}")
    print(f"density\t{stats.density:.6g}")
    print(f"density_sci\t{fmt_sci(stats.density)}")


# ================== KOMUTLAR ==================
def cmd_stats(args: argparse.Namespace) -> int:
    """Veri seti istatistikleri (veya verilen sayımlar için yoğunluk)"""
    if args.counts:
        n_users, n_items, n_edges = args.counts
        if min(n_users, n_items, n_edges) <= 0 or n_edges > n_users * n_items:
            raise ConfigurationError("sayımlar pozitif olmalı ve E <= I·J")
        _print_stats(DatasetStats(n_users, n_items, n_edges))
        return EXIT_OK
    if not args.path:
        raise ConfigurationError("veri yolu veya --counts gerekli")
    graph = load_graph(args.path)
    _print_stats(graph.stats())
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """Her tohum için eğit; checkpoint + epoch log dosyaları yaz"""
    run = load_run_config(args.config).validate()
    graph = load_graph(run.dataset)
    out_dir = run.resolved_output_dir()
    os.makedirs(out_dir, exist_ok=True)
    log(f"📂 Veri: {graph.stats().describe()}")

    for seed in run.seeds:
        train_graph, test = split(graph, run.test_fraction, seed)
        result = train(train_graph, run.train.replace(seed=seed), verbose=not args.quiet)

        ckpt_path = os.path.join(out_dir, f"checkpoint_seed{seed}.npz")
        save_checkpoint(ckpt_path, result.model, meta={
            "dataset": os.path.abspath(run.dataset),
            "test_fraction": run.test_fraction,
            "split_seed": seed,
        })
        log_path = os.path.join(out_dir, f"epochs_seed{seed}.tsv")
        result.history_frame().to_csv(log_path, sep="\t", index=False, float_format="%.17g")

        report = rank_metrics(result.model, train_graph, test, TOP_KS)
        metrics = " ".join(f"{k}={v:.4f}" for k, v in report.metrics().items())
        log(f"💾 seed={seed} -> {ckpt_path} | {metrics}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Checkpoint'i yükle, kaydedilen bölme üzerinde değerlendir"""
    checkpoint = load_checkpoint(args.checkpoint)
    meta = checkpoint.meta
    dataset = args.dataset or meta.get("dataset")
    if not dataset:
        raise ConfigurationError("checkpoint veri yolu içermiyor; --dataset verin")
    graph = load_graph(dataset)
    train_graph, test = split(graph, float(meta.get("test_fraction", 0.2)), int(meta.get("split_seed", 0)))
    model = checkpoint.model
    if (model.n_users, model.n_items) != (graph.n_users, graph.n_items):
        raise InputError("checkpoint ile veri seti boyutları uyuşmuyor")

    report = rank_metrics(model, train_graph, test, TOP_KS)
    rows = [ReportRow("eval", model.config.variant, "all", metric, value)
            for metric, value in report.metrics().items()]
    rows.append(ReportRow("eval", model.config.variant, "all", "skipped_users", float(report.n_skipped)))
    print(format_table(rows))
    if args.output:
        write_report(rows, args.output)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    """Protokolü çalıştır, rapor dosyasını yaz"""
    run = load_run_config(args.config)
    run.protocol = args.protocol
    if args.workers:
        run.workers = args.workers
    run.validate()
    graph = load_graph(run.dataset)
    out_dir = run.resolved_output_dir()
    os.makedirs(out_dir, exist_ok=True)

    rows = run_protocol(args.protocol, graph, run, verbose=not args.quiet)
    path = write_report(rows, os.path.join(out_dir, f"report_{args.protocol}.tsv"))
    print(format_table(rows))
    log(f"💾 Rapor: {path}")
    return EXIT_OK


# ================== PARSER ==================
def build_parser() -> CliParser:
    parser = CliParser(prog="gibrec", description="GIB düzenlemeli graf artırma ile öneri motoru")
    sub = parser.add_subparsers(dest="command", parser_class=CliParser)
    sub.required = True

    p = sub.add_parser("stats", help="veri seti istatistikleri")
    p.add_argument("path", nargs="?")
    p.add_argument("--counts", nargs=3, type=int, metavar=("I", "J", "E"))
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("train", help="modeli eğit")
    p.add_argument("--config", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="checkpoint değerlendir")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("experiment", help="deney protokolü çalıştır")
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(handler=cmd_experiment)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI giriş noktası; hata sınıfını çıkış koduna eşler"""
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, ContractViolation) as e:
        log(f"❗ Konfigürasyon hatası: {e}")
        return EXIT_USAGE
    except (InputError, NoiseInjectionError) as e:
        log(f"❗ Girdi hatası: {e}")
        return EXIT_INPUT
    except (NumericError, TrainingAborted) as e:
        log(f"❌ Sayısal hata: {e}")
        return EXIT_NUMERIC
    except RecommenderError as e:
        log(f"❌ Hata: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
