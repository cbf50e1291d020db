"""Regenerates the golden frames with scapy. Frames shorter than the
Ethernet minimum are zero-padded to 60 bytes, as on the wire."""

from scapy.all import ARP, IP, TCP, Ether, raw


def padded(pkt):
    b = raw(pkt)
    return b + b"\x00" * max(0, 60 - len(b))


def main():
    syn = (
        Ether(dst="02:00:00:00:00:14", src="02:00:00:00:01:0a")
        / IP(src="192.168.132.10", dst="192.168.128.20", ttl=64, id=0x1234, flags="DF")
        / TCP(sport=49152, dport=80, seq=0x01020304, ack=0, flags="S", window=65535)
    )
    who_has = Ether(dst="ff:ff:ff:ff:ff:ff", src="02:00:00:00:01:0a") / ARP(
        op=1, hwsrc="02:00:00:00:01:0a", psrc="192.168.132.10", hwdst="00:00:00:00:00:00", pdst="192.168.132.1"
    )
    with open("syn_frame.hex", "w") as f:
        f.write(padded(syn).hex() + "\n")
    with open("arp_who_has.hex", "w") as f:
        f.write(padded(who_has).hex() + "\n")


if __name__ == "__main__":
    main()
