// expect: race
// Both threads write while holding only the read side of the lock.
#include <pthread.h>
pthread_rwlock_t rw;
int table;
void *reader_a(void *p) {
  pthread_rwlock_rdlock(&rw);
  table = 1;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
void *reader_b(void *p) {
  pthread_rwlock_rdlock(&rw);
  table = 2;
  pthread_rwlock_unlock(&rw);
  return NULL;
}
int main() {
  pthread_t a, b;
  pthread_create(&a, NULL, reader_a, NULL);
  pthread_create(&b, NULL, reader_b, NULL);
  return 0;
}
