import { describe, expect, it } from "vitest";
import { createBackoff } from "../src/backoff.js";

describe("createBackoff", () => {
  it("doubles from the base and pins at the cap", () => {
    const b = createBackoff();
    const seq = [b.next(), b.next(), b.next(), b.next(), b.next(), b.next(), b.next()];
    expect(seq).toEqual([500, 1000, 2000, 4000, 8000, 10_000, 10_000]);
  });

  it("reset starts the ramp over", () => {
    const b = createBackoff();
    b.next();
    b.next();
    b.next();
    b.reset();
    expect(b.next()).toBe(500);
    expect(b.next()).toBe(1000);
  });

  it("honours custom base and cap", () => {
    const b = createBackoff(100, 300);
    expect([b.next(), b.next(), b.next(), b.next()]).toEqual([100, 200, 300, 300]);
  });
});
