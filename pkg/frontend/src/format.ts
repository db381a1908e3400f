// No-client-math contract: every risk number shown to the user is the exact
// JSON field, stringified without rounding, scaling, or any arithmetic.

export function exact(value: number | null): string {
  if (value === null) {
    return "n/a";
  }
  return String(value);
}

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
