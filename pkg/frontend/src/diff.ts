// Line-level diff of consecutive block sources, LCS-based so an inserted
// branch shows up as pure additions rather than a wall of changes.

export type DiffKind = 'same' | 'added' | 'removed';

export interface DiffRow {
  kind: DiffKind;
  text: string;
}

export function diffLines(before: string, after: string): DiffRow[] {
  const a = before === '' ? [] : before.split('\n');
  const b = after === '' ? [] : after.split('\n');
  const rows: DiffRow[] = [];

  // LCS table (sources are function-sized; quadratic is fine)
  const lcs: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i][j] = a[i] === b[j]
        ? lcs[i + 1][j + 1] + 1
        : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      rows.push({ kind: 'same', text: a[i] });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      rows.push({ kind: 'removed', text: a[i] });
      i++;
    } else {
      rows.push({ kind: 'added', text: b[j] });
      j++;
    }
  }
  for (; i < a.length; i++) rows.push({ kind: 'removed', text: a[i] });
  for (; j < b.length; j++) rows.push({ kind: 'added', text: b[j] });
  return rows;
}

export function addedLines(rows: DiffRow[]): string[] {
  return rows.filter((row) => row.kind === 'added').map((row) => row.text);
}
