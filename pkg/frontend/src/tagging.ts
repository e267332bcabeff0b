/** The tag palette: the only path through which a tag can be submitted.
 *
 * The palette renders one button per project tag label and nothing else; no
 * text entry exists anywhere in the tagging surface, so an out-of-tagset tag
 * cannot be expressed in the UI at all. Number keys 1..9 map to palette
 * order for keyboard-first tagging.
 */

export interface PaletteOptions {
  labels: string[];
  onPick(tag: string): void;
}

export function renderTagPalette(options: PaletteOptions): HTMLElement {
  const palette = document.createElement("div");
  palette.className = "tag-palette";
  palette.setAttribute("data-role", "tag-palette");
  options.labels.forEach((label, index) => {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "tag-choice";
    button.setAttribute("data-tag", label);
    const shortcut = index < 9 ? `${index + 1} ` : "";
    button.textContent = `${shortcut}${label}`;
    button.addEventListener("click", () => options.onPick(label));
    palette.appendChild(button);
  });
  return palette;
}

/** Resolve a pressed key to a palette label (keys 1..9), or null. */
export function tagForKey(key: string, labels: string[]): string | null {
  if (!/^[1-9]$/.test(key)) return null;
  const index = Number(key) - 1;
  return index < labels.length ? labels[index] : null;
}
