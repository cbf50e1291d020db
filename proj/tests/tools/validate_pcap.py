#!/usr/bin/env python3
"""Independent pcap check: parse every record with dpkt and verify IPv4,
TCP, UDP, ICMP and IGMP checksums from the raw bytes."""

import argparse
import struct
import sys

import dpkt


def ones_complement(data: bytes) -> int:
    if len(data) % 2:
        data += b"\x00"
    total = sum(struct.unpack("!%dH" % (len(data) // 2), data))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return total


def verifies(data: bytes) -> bool:
    return ones_complement(data) == 0xFFFF


def check_file(path: str) -> tuple[int, dict, list]:
    counts = {"records": 0, "ipv4": 0, "tcp": 0, "udp": 0, "icmp": 0, "igmp": 0, "arp": 0}
    errors = []
    with open(path, "rb") as f:
        reader = dpkt.pcap.Reader(f)
        if reader.datalink() != dpkt.pcap.DLT_EN10MB:
            errors.append(f"{path}: linktype {reader.datalink()} is not Ethernet")
        for n, (ts, buf) in enumerate(reader):
            counts["records"] += 1
            try:
                eth = dpkt.ethernet.Ethernet(buf)
            except dpkt.dpkt.UnpackError as e:
                errors.append(f"{path}#{n}: ethernet: {e}")
                continue
            if eth.type == dpkt.ethernet.ETH_TYPE_ARP:
                counts["arp"] += 1
                if not isinstance(eth.data, dpkt.arp.ARP):
                    errors.append(f"{path}#{n}: undecodable ARP")
                continue
            if eth.type != dpkt.ethernet.ETH_TYPE_IP:
                continue
            ip = eth.data
            if not isinstance(ip, dpkt.ip.IP):
                errors.append(f"{path}#{n}: undecodable IPv4")
                continue
            counts["ipv4"] += 1
            raw = bytes(buf[14:14 + ip.len])
            hl = ip.hl * 4
            if len(raw) < ip.len:
                errors.append(f"{path}#{n}: IPv4 total length {ip.len} exceeds frame")
                continue
            if not verifies(raw[:hl]):
                errors.append(f"{path}#{n}: bad IPv4 header checksum")
            l4 = raw[hl:]
            pseudo = raw[12:20] + struct.pack("!BBH", 0, ip.p, len(l4))
            if ip.p == dpkt.ip.IP_PROTO_TCP:
                counts["tcp"] += 1
                if not isinstance(ip.data, dpkt.tcp.TCP):
                    errors.append(f"{path}#{n}: undecodable TCP")
                elif not verifies(pseudo + l4):
                    errors.append(f"{path}#{n}: bad TCP checksum")
            elif ip.p == dpkt.ip.IP_PROTO_UDP:
                counts["udp"] += 1
                if not isinstance(ip.data, dpkt.udp.UDP):
                    errors.append(f"{path}#{n}: undecodable UDP")
                elif ip.data.sum != 0 and not verifies(pseudo + l4):
                    errors.append(f"{path}#{n}: bad UDP checksum")
            elif ip.p == dpkt.ip.IP_PROTO_ICMP:
                counts["icmp"] += 1
                if not isinstance(ip.data, dpkt.icmp.ICMP):
                    errors.append(f"{path}#{n}: undecodable ICMP")
                elif not verifies(l4):
                    errors.append(f"{path}#{n}: bad ICMP checksum")
            elif ip.p == dpkt.ip.IP_PROTO_IGMP:
                counts["igmp"] += 1
                if not verifies(l4):
                    errors.append(f"{path}#{n}: bad IGMP checksum")
    return counts["records"], counts, errors


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("pcaps", nargs="+")
    parser.add_argument("--min-records", type=int, default=0)
    args = parser.parse_args()
    failed = False
    for path in args.pcaps:
        try:
            records, counts, errors = check_file(path)
        except (OSError, ValueError, dpkt.dpkt.Error) as e:
            print(f"FAIL {path}: {e}")
            failed = True
            continue
        for e in errors[:20]:
            print(e)
        if records < args.min_records:
            errors.append("too few records")
            print(f"{path}: {records} records, expected at least {args.min_records}")
        summary = " ".join(f"{k}={v}" for k, v in counts.items())
        print(f"{'FAIL' if errors else 'ok'} {path}: {summary} errors={len(errors)}")
        failed |= bool(errors)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
