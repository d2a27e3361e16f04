/** Tiny element builder; attrs go through setAttribute, "class" included. */
export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) {
    node.append(typeof c === "string" ? document.createTextNode(c) : c);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Dismissable status line; kind is "ok" or "err" (styling hook). */
export function statusLine(kind: "ok" | "err", text: string): HTMLElement {
  return el("p", { class: `status ${kind}` }, text);
}
