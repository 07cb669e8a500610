// Key-state tracker for WASD teleop. Holds a set of pressed keys and
// turns it into a single (v, omega) intent; the pump in main.ts polls
// this at the command rate, so key auto-repeat never multiplies sends.

export const KEY_V = 1.0;
export const KEY_OMEGA = 0.8;

export type KeyAction = "move" | "estop" | null;

const MOVE_KEYS = new Set(["w", "a", "s", "d"]);

export class Teleop {
  private held = new Set<string>();

  /** Feed a keydown. Returns what the key means, or null if unmapped. */
  keyDown(key: string): KeyAction {
    const k = key.toLowerCase();
    if (k === " " || k === "space" || k === "spacebar") return "estop";
    if (!MOVE_KEYS.has(k)) return null;
    this.held.add(k);
    return "move";
  }

  keyUp(key: string): KeyAction {
    const k = key.toLowerCase();
    if (!MOVE_KEYS.has(k)) return null;
    this.held.delete(k);
    return "move";
  }

  /** Drop all held keys, e.g. when the window loses focus. */
  clear(): void {
    this.held.clear();
  }

  get active(): boolean {
    return this.held.size > 0;
  }

  /**
   * Current movement intent. Opposed keys cancel; returns null when
   * nothing is held so the pump can send a single stop and go idle.
   */
  command(): { v: number; omega: number } | null {
    if (this.held.size === 0) return null;
    let v = 0;
    let omega = 0;
    if (this.held.has("w")) v += KEY_V;
    if (this.held.has("s")) v -= KEY_V;
    if (this.held.has("a")) omega += KEY_OMEGA;
    if (this.held.has("d")) omega -= KEY_OMEGA;
    return { v, omega };
  }
}
