// expect: race
int total;
void bump(int k) {
  total = total + k;
}
void *t1(void *p) {
  bump(1);
  return NULL;
}
void *t2(void *p) {
  bump(2);
  return NULL;
}
int main() {
  create(t1);
  create(t2);
  return 0;
}
