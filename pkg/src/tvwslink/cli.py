"""Command-line front end.

Subcommands: tx, rx, simulate, sweep, regcheck, calibrate. Every flag
can also come from a config file of `key = value` lines (keys match the
long flag names without the leading dashes); flags given on the command
line win. Exit codes: 0 success, 1 failed verdict or failed link stage,
2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from .campaign import CampaignConfig, read_iq, run_link, sweep, write_iq, _build_burst
from .channel import ChannelProfile
from .errors import TvwsLinkError
from .framing import CrcStatus, FrameConfig
from .linkstats import export_csv
from .modulators import SCHEMES, default_params, modulate
from .receiver import SyncConfig, demodulate
from .regulation import (
    TvChannel,
    check_center_frequency,
    check_eirp,
    gain_to_power,
    load_calibration,
    power_to_gain,
)


def _parse_config_file(path: str) -> list[str]:
    """Turn `key = value` lines into argv tokens placed before real flags."""
    tokens: list[str] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"config line without '=': {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            tokens += [f"--{key.replace('_', '-')}", value]
    return tokens


def _parse_snr_range(text: str) -> list[float]:
    """Either a comma list '0,5,10' or a range 'start:stop:step' (inclusive)."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError("range must be start:stop:step, step > 0")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(p) for p in text.split(",")]


def _parse_channel(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("channel must be f_low:f_high in Hz") from exc
    return lo, hi


def _add_link_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scheme", choices=SCHEMES, required=True)
    sub.add_argument("--payload-len", type=int, default=500)
    sub.add_argument("--snr", type=float, default=math.inf, help="channel SNR in dB")
    sub.add_argument("--cfo", type=float, default=0.0, help="carrier offset in Hz")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--fc", type=float, default=600e6)
    sub.add_argument("--discard", type=int, default=0,
                     help="warm-up packets excluded from the counters")
    sub.add_argument("--csv", help="append the report to this CSV file")


def _campaign_config(args, input_path: str, output_path: str | None) -> CampaignConfig:
    return CampaignConfig(
        input_path=input_path,
        scheme=args.scheme,
        payload_len=args.payload_len,
        channel=ChannelProfile(snr_db=args.snr, cfo_hz=args.cfo, seed=args.seed),
        n_discarded=args.discard,
        output_path=output_path,
        csv_path=args.csv,
        fc_hz=args.fc,
        seed=args.seed,
    )


def _print_report(report) -> None:
    print(f"scheme          {report.scheme}")
    print(f"n_tx            {report.n_tx}")
    print(f"n_ok / n_fail   {report.n_ok} / {report.n_fail}")
    print(f"PER / PLR       {report.per:.6f} / {report.plr:.6f}")
    snr = "n/a" if report.snr_db is None else f"{report.snr_db:.2f} dB"
    print(f"SNR             {snr}")
    print(f"throughput      {report.throughput_kbps:.3f} kbps")
    if report.latency_ms is not None:
        print(f"latency         {report.latency_ms:.2f} ms")
    if report.failed_stage:
        print(f"failed stage    {report.failed_stage}")


def _cmd_tx(args) -> int:
    with open(args.infile, "rb") as fh:
        data = fh.read()
    cfg = _campaign_config(args, args.infile, None)
    bits, n_tx = _build_burst(data, cfg)
    block = modulate(bits, cfg.resolved_mod())
    write_iq(args.outfile, block)
    print(f"wrote {len(block)} samples ({n_tx} packets) to {args.outfile}")
    return 0


def _cmd_rx(args) -> int:
    from .campaign import _recover_frames

    mod = default_params(args.scheme)
    block = read_iq(args.infile, mod.sample_rate)
    cfg = CampaignConfig(input_path=args.infile, scheme=args.scheme,
                         payload_len=args.payload_len)
    try:
        bits = demodulate(args.scheme, block, mod, SyncConfig())
    except TvwsLinkError as exc:
        print(f"receive failed: {exc}", file=sys.stderr)
        return 1
    frames = _recover_frames(bits, cfg)
    ok = [f for f in frames if f.crc_ok is CrcStatus.OK]
    payload = b"".join(f.payload for f in ok)
    with open(args.outfile, "wb") as fh:
        fh.write(payload)
    print(f"recovered {len(ok)}/{len(frames)} frames, {len(payload)} bytes")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _campaign_config(args, args.infile, args.outfile)
    report = run_link(cfg)
    _print_report(report)
    return 1 if report.failed_stage else 0


def _cmd_sweep(args) -> int:
    cfg = _campaign_config(args, args.infile, None)
    reports = sweep(cfg, args.snr_points)
    if args.csv:
        for report in reports:
            export_csv(report, args.csv)
    print(f"# {cfg.scheme}: snr_db per plr throughput_kbps")
    for snr, report in zip(args.snr_points, reports):
        print(f"{snr:g} {report.per:.6f} {report.plr:.6f} "
              f"{report.throughput_kbps:.3f}")
    return 1 if any(r.failed_stage for r in reports) else 0


def _cmd_regcheck(args) -> int:
    lo, hi = args.channel
    ch = TvChannel(f_low=lo, f_high=hi)
    verdicts = [check_center_frequency(args.fc, ch),
                check_eirp(args.power_dbm, args.gain_dbi)]
    ok = True
    for v in verdicts:
        status = "pass" if v.passed else f"FAIL ({v.detail})"
        print(f"{v.rule}: {status}")
        ok = ok and v.passed
    return 0 if ok else 1


def _cmd_calibrate(args) -> int:
    cal = load_calibration(args.table)
    if args.gain is not None:
        print(f"{gain_to_power(cal, args.gain):.4f}")
    elif args.power is not None:
        print(f"{power_to_gain(cal, args.power):.6f}")
    else:
        print("one of --gain or --power is required", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvwslink",
                                     description="Narrowband TVWS link toolkit")
    parser.add_argument("--config", help="key = value file supplying default flags")
    subs = parser.add_subparsers(dest="command", required=True)

    tx = subs.add_parser("tx", help="modulate a file into raw I/Q samples")
    tx.add_argument("infile")
    tx.add_argument("outfile")
    _add_link_args(tx)
    tx.set_defaults(func=_cmd_tx)

    rx = subs.add_parser("rx", help="demodulate raw I/Q samples into payload bytes")
    rx.add_argument("infile")
    rx.add_argument("outfile")
    rx.add_argument("--scheme", choices=SCHEMES, required=True)
    rx.add_argument("--payload-len", type=int, default=500)
    rx.set_defaults(func=_cmd_rx)

    sim = subs.add_parser("simulate", help="run one end-to-end link")
    sim.add_argument("infile")
    sim.add_argument("outfile")
    _add_link_args(sim)
    sim.set_defaults(func=_cmd_simulate)

    sw = subs.add_parser("sweep", help="run_link across a list of SNR points")
    sw.add_argument("infile")
    sw.add_argument("--snr-points", type=_parse_snr_range, required=True,
                    help="comma list or start:stop:step in dB")
    _add_link_args(sw)
    sw.set_defaults(func=_cmd_sweep)

    reg = subs.add_parser("regcheck", help="frequency and EIRP verdicts")
    reg.add_argument("--fc", type=float, required=True)
    reg.add_argument("--channel", type=_parse_channel, required=True,
                     help="TV channel as f_low:f_high in Hz")
    reg.add_argument("--gain-dbi", type=float, default=6.0)
    reg.add_argument("--power-dbm", type=float, default=12.6)
    reg.set_defaults(func=_cmd_regcheck)

    cal = subs.add_parser("calibrate", help="normalized gain <-> dBm queries")
    cal.add_argument("--gain", type=float)
    cal.add_argument("--power", type=float)
    cal.add_argument("--table", help="alternate calibration CSV")
    cal.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        i = argv.index("--config")
        try:
            path = argv[i + 1]
        except IndexError:
            print("--config needs a path", file=sys.stderr)
            return 2
        head, tail = argv[: i + 2], argv[i + 2 :]
        # insert config tokens after the subcommand so real flags override them
        sub_at = next((j for j, a in enumerate(tail) if not a.startswith("-")), None)
        extra = _parse_config_file(path)
        if sub_at is None:
            argv = head + tail + extra
        else:
            argv = head + tail[: sub_at + 1] + extra + tail[sub_at + 1 :]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except TvwsLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
