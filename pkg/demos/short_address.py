"""
Spotting a short-address transfer
=================================

A ``transfer(address,uint256)`` call whose address lost its trailing zero
byte. The EVM pads the missing byte on the right, so the amount silently
grows by a factor of 256.
"""

from sigscope.abi import encode_calldata, parse_signature
from sigscope.parcheck import check_calldata, detect_short_address

transfer = parse_signature("transfer(address,uint256)")
to = 0x62E2B4F4B9E95E6D6A6A1E6F5C4A7B09F3D1A200

good = encode_calldata(transfer.selector, transfer.params, [to, 0x2710])
print("well-formed:", good.hex())
print("  check:", check_calldata(good, transfer).to_json())

# drop the address's last byte; the amount word now starts one byte early
short = good[:35] + good[36:]
print("\nshort:     ", short.hex())

# what the contract reads for the amount once calldata is zero-padded
amount = int.from_bytes(short[36:68].ljust(32, b"\x00"), "big")
print(f"  amount as the EVM sees it: {amount:#x} (was 0x2710)")

verdict = detect_short_address(short)
print("  short-address verdict:", verdict.to_json())

# a structural check alone only says the calldata is truncated
print("  plain check:", [d.kind for d in check_calldata(short, transfer).defects])
