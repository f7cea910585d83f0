// expect: race
// allow: unknown
// One thread sweeps the array while the other writes a single cell.
int a[4];
void *t1(void *p) {
  for (int i = 0; i < 4; i++)
    a[i] = i;
  return NULL;
}
void *t2(void *p) {
  a[2] = 7;
  return NULL;
}
int main() {
  create(t1);
  create(t2);
  return 0;
}
